#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hometrend/series.hpp"

namespace hometrend::qc {

struct QCConfig {
    double tmax_upper = 50.0;        // Tmax strictly above this is rejected
    double tmin_lower = 10.0;        // Tmin strictly below this is rejected
    double interdiurnal_limit = 10.0;
    unsigned max_identical_run = 5;  // runs longer than this are removed
    bool auto_swap = true;

    void validate() const;
};

enum class Check { ORDER, TMAX_HIGH, TMIN_LOW, STEP, PERSISTENCE };
inline constexpr std::size_t kCheckCount = 5;

enum class Action { SWAPPED, SET_MISSING, FLAG_ONLY };

// Which variable(s) a flag concerns.
enum class Target { TMAX, TMIN, BOTH };

[[nodiscard]] std::string_view to_string(Check c);
[[nodiscard]] std::string_view to_string(Action a);
[[nodiscard]] std::string_view to_string(Target t);

struct QCFlag {
    Date date{};
    Check check = Check::ORDER;
    Target target = Target::BOTH;
    std::optional<double> original_tmax;
    std::optional<double> original_tmin;
    Action action = Action::FLAG_ONLY;
    unsigned run_length = 0;  // PERSISTENCE only; `date` is the first day of the run

    bool operator==(const QCFlag&) const = default;
};

struct QCReport {
    std::string station_id;
    std::vector<QCFlag> flags;
    std::array<std::size_t, kCheckCount> counts{};

    void add(QCFlag flag);
    void append(const std::vector<QCFlag>& more);
    [[nodiscard]] std::size_t count(Check c) const { return counts[static_cast<std::size_t>(c)]; }
};

struct OrderResult {
    DailySeries tmax;
    DailySeries tmin;
    std::vector<QCFlag> flags;
};

struct SeriesResult {
    DailySeries series;
    std::vector<QCFlag> flags;
};

struct QCResult {
    DailySeries tmax;
    DailySeries tmin;
    QCReport report;
};

/// Resolves days where Tmin exceeds Tmax: swap when allowed and the swapped
/// pair passes the plausibility limits, otherwise blank both values.
[[nodiscard]] OrderResult check_order(const DailySeries& tmax, const DailySeries& tmin,
                                      const QCConfig& cfg);

/// Blanks Tmax above tmax_upper or Tmin below tmin_lower.
[[nodiscard]] SeriesResult check_thresholds(const DailySeries& series, const QCConfig& cfg);

/// Flags both days of every consecutive-day jump larger than interdiurnal_limit.
[[nodiscard]] std::vector<QCFlag> check_interdiurnal(const DailySeries& series,
                                                     const QCConfig& cfg);

/// Blanks every maximal run of identical values (at 0.1 degree resolution)
/// on consecutive days that is longer than max_identical_run.
[[nodiscard]] SeriesResult check_persistence(const DailySeries& series, const QCConfig& cfg);

/// Full battery: order, thresholds, persistence, then step flags.
[[nodiscard]] QCResult run_qc(const DailySeries& tmax, const DailySeries& tmin,
                              const QCConfig& cfg);

}  // namespace hometrend::qc
