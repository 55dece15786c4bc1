#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hometrend/homogeneity.hpp"
#include "hometrend/series.hpp"

namespace hometrend::homogenize {

struct YearMonth {
    int year = 0;
    unsigned month = 1;

    auto operator<=>(const YearMonth&) const = default;
};

struct DetectOptions {
    double alpha = 0.05;
    std::size_t min_segment_len = 60;  // present months per segment
    std::size_t n_sims = 2000;
    std::uint64_t seed = 0;
    homogeneity::TestOptions test{};
};

struct BreakSet {
    // Index into the difference series' entries of the first month of each new segment.
    std::vector<std::size_t> breaks;
    std::vector<YearMonth> break_months;
    std::vector<double> p_values;
    double alpha = 0.05;
    std::size_t min_segment_len = 60;
    std::string method = "binary segmentation, SNHT with permutation p-values";
};

struct Segment {
    YearMonth first;
    YearMonth last;                   // inclusive
    std::array<double, 12> offsets{};  // added to candidate values, by calendar month
    std::array<bool, 12> fallback{};   // month offset taken from the all-month offset
};

struct AdjustmentPlan {
    std::vector<Segment> segments;  // chronological; the last one is the anchor
    [[nodiscard]] std::size_t anchor() const { return segments.empty() ? 0 : segments.size() - 1; }
    [[nodiscard]] const Segment* find(YearMonth ym) const;
};

struct HomogenizedSeries {
    DailySeries series;
    AdjustmentPlan plan;
    BreakSet breaks;
    std::string reference_id;
};

/// Entrywise candidate - reference over the months both series contain.
/// Throws InputError when the series do not overlap or are not aligned.
[[nodiscard]] MonthlySeries difference_series(const MonthlySeries& candidate,
                                              const MonthlySeries& reference);

/// Recursive binary segmentation of the difference series.
[[nodiscard]] BreakSet detect_breaks(const MonthlySeries& diff, const DetectOptions& opts = {});

/// Per-segment, per-calendar-month offsets that bring every earlier segment to
/// the level of the latest one. Months with fewer than 3 values in either
/// segment use the all-month offset.
[[nodiscard]] AdjustmentPlan compute_adjustments(const MonthlySeries& diff, const BreakSet& breaks);

/// Adds each daily value's (segment, month) offset. Missing values stay missing.
/// Throws PlanCoverageError for dates outside the plan.
[[nodiscard]] HomogenizedSeries apply_daily(const DailySeries& candidate, const AdjustmentPlan& plan);

struct Outcome {
    MonthlySeries diff;
    HomogenizedSeries result;
};

/// Monthly-first homogenization of one daily series against its reference.
[[nodiscard]] Outcome homogenize_daily(const DailySeries& candidate, const DailySeries& reference,
                                       const CompletenessPolicy& policy,
                                       const DetectOptions& opts = {});

}  // namespace hometrend::homogenize
