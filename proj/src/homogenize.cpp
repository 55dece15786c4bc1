#include "hometrend/homogenize.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "hometrend/errors.hpp"
#include "hometrend/seeding.hpp"

namespace hometrend::homogenize {

namespace {

constexpr std::size_t kMinMonthSamples = 3;

struct Present {
    std::vector<double> values;
    std::vector<std::size_t> positions;  // entry index of each value
};

Present present_values(const MonthlySeries& s) {
    Present p;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
        if (!s.entries[i].mean) continue;
        p.values.push_back(*s.entries[i].mean);
        p.positions.push_back(i);
    }
    return p;
}

void segment_recursive(const Present& data, std::size_t lo, std::size_t hi,
                       const DetectOptions& opts, std::vector<std::pair<std::size_t, double>>& out) {
    const std::size_t len = hi - lo;
    if (len < 2 * opts.min_segment_len || len < 2) return;
    const std::span<const double> seg(data.values.data() + lo, len);

    homogeneity::TestOptions test_opts = opts.test;
    test_opts.min_n = 2;
    homogeneity::ChangePoint cp;
    try {
        cp = homogeneity::snht(seg, test_opts);
    } catch (const DegenerateSeriesError&) {
        return;
    }
    const std::size_t split = cp.index;
    if (split < opts.min_segment_len || len - split < opts.min_segment_len) return;

    const auto seed = derive_seed(opts.seed, fmt::format("segment/{}-{}", lo, hi));
    const double p =
        homogeneity::monte_carlo_p(homogeneity::Test::SNHT, seg, opts.n_sims, seed, test_opts);
    if (!(p < opts.alpha)) return;

    out.emplace_back(lo + split, p);
    segment_recursive(data, lo, lo + split, opts, out);
    segment_recursive(data, lo + split, hi, opts, out);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

const Segment* AdjustmentPlan::find(YearMonth ym) const {
    for (const auto& seg : segments)
        if (seg.first <= ym && ym <= seg.last) return &seg;
    return nullptr;
}

MonthlySeries difference_series(const MonthlySeries& candidate, const MonthlySeries& reference) {
    if (candidate.variable != reference.variable)
        throw InputError(fmt::format("reference variable {} does not match candidate {}",
                                     to_string(reference.variable), to_string(candidate.variable)));
    if (candidate.station_id != reference.station_id)
        throw InputError(fmt::format("reference station '{}' does not match candidate '{}'",
                                     reference.station_id, candidate.station_id));

    std::map<YearMonth, const MonthlyEntry*> ref;
    for (const auto& e : reference.entries) ref.emplace(YearMonth{e.year, e.month}, &e);

    MonthlySeries out{candidate.station_id, candidate.variable, {}};
    for (const auto& c : candidate.entries) {
        const auto it = ref.find({c.year, c.month});
        if (it == ref.end()) continue;
        const MonthlyEntry& r = *it->second;
        MonthlyEntry d{c.year, c.month, std::nullopt, std::min(c.n_present, r.n_present),
                       c.n_expected};
        if (c.mean && r.mean) d.mean = *c.mean - *r.mean;
        out.entries.push_back(d);
    }
    if (out.entries.empty())
        throw InputError(fmt::format("station {}: candidate and reference periods do not overlap",
                                     candidate.station_id));
    return out;
}

BreakSet detect_breaks(const MonthlySeries& diff, const DetectOptions& opts) {
    BreakSet set;
    set.alpha = opts.alpha;
    set.min_segment_len = opts.min_segment_len;

    const Present data = present_values(diff);
    std::vector<std::pair<std::size_t, double>> found;
    segment_recursive(data, 0, data.values.size(), opts, found);
    std::sort(found.begin(), found.end());

    for (const auto& [present_index, p] : found) {
        const std::size_t pos = data.positions[present_index];
        set.breaks.push_back(pos);
        set.break_months.push_back({diff.entries[pos].year, diff.entries[pos].month});
        set.p_values.push_back(p);
    }
    return set;
}

AdjustmentPlan compute_adjustments(const MonthlySeries& diff, const BreakSet& breaks) {
    AdjustmentPlan plan;
    if (diff.entries.empty()) return plan;

    std::vector<std::size_t> bounds{0};
    for (std::size_t b : breaks.breaks) {
        if (b <= bounds.back() || b >= diff.entries.size())
            throw InputError("break indices must be increasing and inside the series");
        bounds.push_back(b);
    }
    bounds.push_back(diff.entries.size());

    struct Samples {
        std::array<std::vector<double>, 12> by_month;
        std::vector<double> all;
    };
    std::vector<Samples> samples(bounds.size() - 1);
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        Segment seg;
        seg.first = {diff.entries[bounds[s]].year, diff.entries[bounds[s]].month};
        seg.last = {diff.entries[bounds[s + 1] - 1].year, diff.entries[bounds[s + 1] - 1].month};
        plan.segments.push_back(seg);
        for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i) {
            const auto& e = diff.entries[i];
            if (!e.mean) continue;
            samples[s].by_month[e.month - 1].push_back(*e.mean);
            samples[s].all.push_back(*e.mean);
        }
    }

    const std::size_t anchor = plan.anchor();
    const Samples& ref = samples[anchor];
    for (std::size_t s = 0; s < anchor; ++s) {
        const Samples& cur = samples[s];
        const double overall =
            (ref.all.empty() || cur.all.empty()) ? 0.0 : mean_of(ref.all) - mean_of(cur.all);
        for (std::size_t k = 0; k < 12; ++k) {
            if (ref.by_month[k].size() >= kMinMonthSamples &&
                cur.by_month[k].size() >= kMinMonthSamples) {
                plan.segments[s].offsets[k] = mean_of(ref.by_month[k]) - mean_of(cur.by_month[k]);
            } else {
                plan.segments[s].offsets[k] = overall;
                plan.segments[s].fallback[k] = true;
            }
        }
    }
    return plan;
}

HomogenizedSeries apply_daily(const DailySeries& candidate, const AdjustmentPlan& plan) {
    HomogenizedSeries out;
    out.series = candidate;
    out.plan = plan;
    for (auto& [date, value] : out.series.records) {
        const YearMonth ym{year_of(date), month_of(date)};
        const Segment* seg = plan.find(ym);
        if (seg == nullptr)
            throw PlanCoverageError(fmt::format("station {}: {} is not covered by the adjustment plan",
                                                candidate.station_id, format_iso_date(date)));
        if (value) *value += seg->offsets[ym.month - 1];
    }
    return out;
}

Outcome homogenize_daily(const DailySeries& candidate, const DailySeries& reference,
                         const CompletenessPolicy& policy, const DetectOptions& opts) {
    Outcome out;
    out.diff = difference_series(aggregate_monthly(candidate, policy),
                                 aggregate_monthly(reference, policy));
    auto breaks = detect_breaks(out.diff, opts);
    const auto plan = compute_adjustments(out.diff, breaks);
    out.result = apply_daily(candidate, plan);
    out.result.breaks = std::move(breaks);
    out.result.reference_id = reference.station_id;
    return out;
}

}  // namespace hometrend::homogenize
