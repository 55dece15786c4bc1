#include "hometrend/trend.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "hometrend/errors.hpp"
#include "hometrend/homogeneity.hpp"

namespace hometrend::trend {

namespace {

constexpr double kZ975 = 1.959963984540054;
constexpr std::size_t kMinTrendLength = 10;

double tie_term(double t) { return t * (t - 1.0) * (2.0 * t + 5.0); }

int sign(double d) { return (d > 0.0) - (d < 0.0); }

}  // namespace

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::INCREASING: return "INCREASING";
        case Direction::DECREASING: return "DECREASING";
        case Direction::NONE: return "NONE";
    }
    return "?";
}

TimedSeries TimedSeries::from_annual(const AnnualSeries& s) {
    TimedSeries out;
    for (const auto& e : s.entries) {
        if (!e.mean) continue;
        out.times.push_back(static_cast<double>(e.year));
        out.values.push_back(*e.mean);
    }
    return out;
}

MKStatistic mk_s(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw TooShortError(fmt::format("Mann-Kendall needs n >= 2, got {}", n));
    MKStatistic out;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out.s += sign(values[j] - values[i]);

    std::map<double, std::size_t> groups;
    for (double v : values) ++groups[v];
    for (const auto& [value, count] : groups)
        if (count >= 2) out.ties.push_back({value, count});
    return out;
}

double var_s(std::size_t n, std::span<const TieGroup> ties) {
    const auto nd = static_cast<double>(n);
    double correction = 0.0;
    for (const auto& g : ties) correction += tie_term(static_cast<double>(g.size));
    return (nd * (nd - 1.0) * (2.0 * nd + 5.0) - correction) / 18.0;
}

double z_stat(std::int64_t s, double variance) {
    if (variance < 0.0) throw std::invalid_argument("negative variance");
    if (s == 0) return 0.0;
    if (variance == 0.0)
        throw DegenerateSeriesError(fmt::format("S = {} with zero variance", s));
    const double sd = std::sqrt(variance);
    return s > 0 ? (static_cast<double>(s) - 1.0) / sd : (static_cast<double>(s) + 1.0) / sd;
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

RankAutocorr rank_autocorr(std::span<const double> values, std::size_t max_lag) {
    const std::size_t n = values.size();
    if (n < 4) throw TooShortError(fmt::format("rank autocorrelation needs n >= 4, got {}", n));
    if (max_lag > n - 3)
        throw InputError(fmt::format("max_lag {} exceeds n - 3 = {}", max_lag, n - 3));

    const auto ranks = homogeneity::mid_ranks(values);
    const double mean = std::accumulate(ranks.begin(), ranks.end(), 0.0) / static_cast<double>(n);
    double denom = 0.0;
    for (double r : ranks) denom += (r - mean) * (r - mean);

    RankAutocorr out;
    out.rho.assign(max_lag, 0.0);
    out.significant.assign(max_lag, false);
    if (denom == 0.0) {
        out.degenerate = true;
        return out;
    }
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) num += (ranks[t] - mean) * (ranks[t + k] - mean);
        const double rho = num / denom;
        out.rho[k - 1] = rho;
        out.significant[k - 1] = std::abs(rho) > kZ975 / std::sqrt(static_cast<double>(n - k));
    }
    return out;
}

HamedRaoResult hamed_rao_var(const TimedSeries& series, const HamedRaoOptions& opts) {
    const std::size_t n = series.size();
    if (n < kMinTrendLength)
        throw TooShortError(fmt::format("Hamed-Rao correction needs n >= {}, got {}",
                                        kMinTrendLength, n));

    std::vector<double> work = series.values;
    if (opts.detrend) {
        const double slope = sen_slope(series).slope_per_year;
        for (std::size_t i = 0; i < n; ++i) work[i] -= slope * series.times[i];
    }

    HamedRaoResult out;
    out.var_s = var_s(n, mk_s(series.values).ties);
    out.autocorr = rank_autocorr(work, n - 3);

    const auto nd = static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t k = 1; k <= n - 3; ++k) {
        bool include = false;
        switch (opts.lag_rule) {
            case LagRule::SIGNIFICANT: include = out.autocorr.significant[k - 1]; break;
            case LagRule::ALL: include = true; break;
            case LagRule::FIRST_K: include = k <= opts.first_k; break;
        }
        if (!include) continue;
        const auto m = static_cast<double>(n - k);
        sum += m * (m - 1.0) * (m - 2.0) * out.autocorr.rho[k - 1];
    }
    double factor = 1.0 + 2.0 / (nd * (nd - 1.0) * (nd - 2.0)) * sum;
    if (factor < opts.factor_floor) {
        factor = opts.factor_floor;
        out.floored = true;
    }
    out.correction_factor = factor;
    out.var_s_star = out.var_s * factor;
    return out;
}

SenResult sen_slope(const TimedSeries& series) {
    const std::size_t n = series.size();
    if (series.times.size() != n) throw InputError("times and values differ in length");
    std::vector<double> slopes;
    slopes.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dt = series.times[j] - series.times[i];
            if (dt == 0.0) continue;
            slopes.push_back((series.values[j] - series.values[i]) / dt);
        }
    if (slopes.empty()) throw TooShortError("Sen's slope needs a pair with distinct times");

    std::sort(slopes.begin(), slopes.end());
    const std::size_t k = slopes.size();
    const double median =
        k % 2 == 1 ? slopes[k / 2] : 0.5 * (slopes[k / 2 - 1] + slopes[k / 2]);
    return {median, 10.0 * median, k};
}

TrendResult trend_test(const TimedSeries& series, double alpha, const HamedRaoOptions& opts) {
    const std::size_t n = series.size();
    if (n < kMinTrendLength)
        throw TooShortError(fmt::format("trend test needs n >= {}, got {}", kMinTrendLength, n));

    const auto stat = mk_s(series.values);
    const auto hr = hamed_rao_var(series, opts);

    TrendResult out;
    auto& mk = out.mk;
    mk.n = n;
    mk.s = stat.s;
    mk.var_s = hr.var_s;
    mk.var_s_star = hr.var_s_star;
    mk.correction_factor = hr.correction_factor;
    mk.factor_floored = hr.floored;
    mk.z = z_stat(stat.s, hr.var_s_star);
    mk.p_two_sided = two_sided_p(mk.z);
    mk.significant = mk.p_two_sided < alpha;
    if (mk.significant) mk.direction = stat.s > 0 ? Direction::INCREASING : Direction::DECREASING;
    out.sen = sen_slope(series);
    return out;
}

MKResult mann_kendall(std::span<const double> values, double alpha) {
    const auto stat = mk_s(values);
    MKResult mk;
    mk.n = values.size();
    mk.s = stat.s;
    mk.var_s = var_s(values.size(), stat.ties);
    mk.var_s_star = mk.var_s;
    mk.z = z_stat(stat.s, mk.var_s);
    mk.p_two_sided = two_sided_p(mk.z);
    mk.significant = mk.p_two_sided < alpha;
    if (mk.significant) mk.direction = stat.s > 0 ? Direction::INCREASING : Direction::DECREASING;
    return mk;
}

}  // namespace hometrend::trend
