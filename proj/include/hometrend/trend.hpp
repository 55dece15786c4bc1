#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hometrend/series.hpp"

namespace hometrend::trend {

// Values paired with their time coordinate (years for annual and
// calendar-month series). Missing entries are dropped on construction.
struct TimedSeries {
    std::vector<double> times;
    std::vector<double> values;

    [[nodiscard]] static TimedSeries from_annual(const AnnualSeries& s);
    [[nodiscard]] std::size_t size() const { return values.size(); }
};

struct TieGroup {
    double value = 0.0;
    std::size_t size = 0;  // >= 2
};

struct MKStatistic {
    std::int64_t s = 0;
    std::vector<TieGroup> ties;
};

struct RankAutocorr {
    std::vector<double> rho;        // rho[k-1] is lag k
    std::vector<bool> significant;  // |rho_k| > z_0.975 / sqrt(n - k)
    bool degenerate = false;        // constant ranks; every rho reported as 0
};

enum class LagRule { SIGNIFICANT, ALL, FIRST_K };

struct HamedRaoOptions {
    LagRule lag_rule = LagRule::SIGNIFICANT;
    std::size_t first_k = 1;      // used by LagRule::FIRST_K
    bool detrend = false;         // remove the Sen slope before ranking
    double factor_floor = 0.25;   // lower bound of n/n*
};

struct HamedRaoResult {
    double var_s = 0.0;
    double var_s_star = 0.0;
    double correction_factor = 1.0;  // n/n*
    bool floored = false;
    RankAutocorr autocorr;
};

enum class Direction { INCREASING, DECREASING, NONE };
[[nodiscard]] std::string_view to_string(Direction d);

struct MKResult {
    std::size_t n = 0;
    std::int64_t s = 0;
    double var_s = 0.0;
    double var_s_star = 0.0;
    double correction_factor = 1.0;
    bool factor_floored = false;
    double z = 0.0;
    double p_two_sided = 1.0;
    bool significant = false;
    Direction direction = Direction::NONE;
};

struct SenResult {
    double slope_per_year = 0.0;
    double slope_per_decade = 0.0;
    std::size_t n_pairs = 0;
};

struct TrendResult {
    MKResult mk;
    SenResult sen;
};

/// S = sum over i<j of sgn(x_j - x_i), with groups of tied values.
[[nodiscard]] MKStatistic mk_s(std::span<const double> values);

/// Tie-corrected variance of S.
[[nodiscard]] double var_s(std::size_t n, std::span<const TieGroup> ties);

/// Continuity-corrected standard score of S.
[[nodiscard]] double z_stat(std::int64_t s, double variance);

/// Two-sided standard normal tail probability of |z|.
[[nodiscard]] double two_sided_p(double z);

/// Lag-k sample autocorrelation of the mid-ranks for k = 1..max_lag.
[[nodiscard]] RankAutocorr rank_autocorr(std::span<const double> values, std::size_t max_lag);

/// Autocorrelation-corrected variance Var*(S) = Var(S) * n/n*.
[[nodiscard]] HamedRaoResult hamed_rao_var(const TimedSeries& series,
                                           const HamedRaoOptions& opts = {});

/// Median of pairwise slopes (x_j - x_i)/(t_j - t_i) over pairs with t_i != t_j.
[[nodiscard]] SenResult sen_slope(const TimedSeries& series);

/// Modified Mann-Kendall test on Var*(S) plus Sen's slope.
[[nodiscard]] TrendResult trend_test(const TimedSeries& series, double alpha = 0.05,
                                     const HamedRaoOptions& opts = {});

/// Plain Mann-Kendall decision (no autocorrelation correction).
[[nodiscard]] MKResult mann_kendall(std::span<const double> values, double alpha = 0.05);

}  // namespace hometrend::trend
