#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hometrend/series.hpp"

namespace hometrend::homogeneity {

enum class Test { SNHT, PETTITT, BLRT, BUT };
inline constexpr std::array<Test, 4> kAllTests{Test::SNHT, Test::PETTITT, Test::BLRT, Test::BUT};

enum class StationClass { A_USEFUL, B_DOUBTFUL, C_SUSPECT };

enum class SigmaDivisor { POPULATION, SAMPLE };

[[nodiscard]] std::string_view to_string(Test t);
[[nodiscard]] std::string_view to_string(StationClass c);  // "A (Useful)" etc.

struct TestOptions {
    std::size_t min_n = 10;
    SigmaDivisor snht_sigma = SigmaDivisor::POPULATION;
    SigmaDivisor buishand_sigma = SigmaDivisor::SAMPLE;
};

// Gap-free sequence of means handed to the tests. Missing entries of the
// source series are dropped and counted.
struct TestSeries {
    std::vector<double> values;
    std::vector<int> years;  // time label of each value
    std::string source;      // e.g. "ST1/DTR/annual"
    std::size_t n_dropped = 0;

    [[nodiscard]] static TestSeries from_annual(const AnnualSeries& s, std::string source);
    [[nodiscard]] std::size_t size() const { return values.size(); }
};

struct ChangePoint {
    double statistic = 0.0;
    std::size_t index = 0;  // 1-based length of the first segment
};

struct HomogeneityTestResult {
    Test test = Test::SNHT;
    double statistic = 0.0;
    std::optional<std::size_t> change_point;  // absent for BUT
    double p_value = 1.0;
    std::size_t n_sims = 0;
    std::uint64_t seed = 0;
};

struct HomogeneityBattery {
    std::array<HomogeneityTestResult, 4> results;  // ordered as kAllTests
    double alpha = 0.05;
    unsigned n_rejections = 0;
    StationClass station_class = StationClass::A_USEFUL;

    [[nodiscard]] const HomogeneityTestResult& get(Test t) const;
};

// Kernels. All throw TooShortError when values.size() < opts.min_n; the
// standardized ones throw DegenerateSeriesError on zero spread.

/// max over 1 <= m < n of m*z1^2 + (n-m)*z2^2 on standardized sub-means.
[[nodiscard]] ChangePoint snht(std::span<const double> values, const TestOptions& opts = {});

/// Rank statistic max |2*sum(r_1..r_m) - m(n+1)| with mid-ranks for ties.
[[nodiscard]] ChangePoint pettitt(std::span<const double> values, const TestOptions& opts = {});

/// Adjusted partial sums S*_0..S*_n of deviations from the mean.
[[nodiscard]] std::vector<double> buishand_partial_sums(std::span<const double> values);

/// Buishand likelihood ratio statistic V and its argmax.
[[nodiscard]] ChangePoint buishand_lr(std::span<const double> values, const TestOptions& opts = {});

/// Buishand U statistic.
[[nodiscard]] double buishand_u(std::span<const double> values, const TestOptions& opts = {});

/// Mid-ranks (1-based, ties averaged).
[[nodiscard]] std::vector<double> mid_ranks(std::span<const double> values);

/// Statistic and change point of one test on one series.
[[nodiscard]] ChangePoint evaluate(Test test, std::span<const double> values,
                                   const TestOptions& opts = {});

/// Permutation Monte Carlo p-value (1 + #{null >= observed}) / (n_sims + 1).
/// Null draws shuffle the observed values; bit-identical for a given seed.
[[nodiscard]] double monte_carlo_p(Test test, std::span<const double> values,
                                   std::size_t n_sims, std::uint64_t seed,
                                   const TestOptions& opts = {});

[[nodiscard]] HomogeneityTestResult run_test(Test test, const TestSeries& series,
                                             std::size_t n_sims, std::uint64_t seed,
                                             const TestOptions& opts = {});

/// Counts p < alpha over exactly four p-values: 0-1 -> A, 2 -> B, 3-4 -> C.
[[nodiscard]] StationClass classify(std::span<const double> p_values, double alpha = 0.05);
[[nodiscard]] unsigned count_rejections(std::span<const double> p_values, double alpha = 0.05);

/// All four tests with seeds derived from run_seed and the series source.
[[nodiscard]] HomogeneityBattery run_battery(const TestSeries& series, std::size_t n_sims,
                                             std::uint64_t run_seed, double alpha = 0.05,
                                             const TestOptions& opts = {});

}  // namespace hometrend::homogeneity
