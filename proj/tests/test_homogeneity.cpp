#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hometrend/errors.hpp"
#include "hometrend/homogeneity.hpp"
#include "oracles.hpp"

using namespace hometrend;
using namespace hometrend::homogeneity;

namespace {

TestOptions short_ok(std::size_t n = 2) {
    TestOptions o;
    o.min_n = n;
    return o;
}

std::vector<double> alternating(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i % 2 == 0 ? 1.0 : -1.0;
    return v;
}

std::vector<double> step_series(std::mt19937_64& rng, std::size_t n, std::size_t at, double delta,
                                double sd) {
    auto v = oracle::gaussian(rng, n, sd);
    for (std::size_t i = at; i < n; ++i) v[i] += delta;
    return v;
}

}  // namespace

TEST(Snht, HandEvaluatedFourPointSeries) {
    // mean 0.5, population sigma 0.5, z1 = -1, z2 = 1 at m = 2.
    const std::vector<double> y{0, 0, 1, 1};
    const auto cp = snht(y, short_ok(4));
    EXPECT_NEAR(cp.statistic, 4.0, 1e-12);
    EXPECT_EQ(cp.index, 2u);
}

TEST(Snht, DegenerateAndShort) {
    EXPECT_THROW((void)snht(std::vector<double>(12, 3.3)), DegenerateSeriesError);
    EXPECT_THROW((void)snht(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9}), TooShortError);
}

TEST(Snht, MatchesOracleOnRandomSeries) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const auto y = oracle::gaussian(rng, 10 + k % 30);
        const auto cp = snht(y);
        const auto ref = oracle::snht(y);
        EXPECT_NEAR(cp.statistic, ref.value, 1e-9 * ref.value);
        EXPECT_EQ(cp.index, ref.index);
    }
}

TEST(Pettitt, HandEvaluatedRamp) {
    // U_m = (-3, -4, -3, 0) for m = 1..4.
    const auto cp = pettitt(std::vector<double>{1, 2, 3, 4}, short_ok(4));
    EXPECT_EQ(cp.statistic, 4.0);
    EXPECT_EQ(cp.index, 2u);
}

TEST(Pettitt, ConstantSeriesIsZero) {
    const auto cp = pettitt(std::vector<double>(15, 7.0));
    EXPECT_EQ(cp.statistic, 0.0);
    EXPECT_EQ(cp.index, 1u);
}

TEST(Pettitt, InvariantUnderMonotoneTransform) {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 50; ++k) {
        auto y = oracle::gaussian(rng, 25);
        y[3] = y[7];  // a tie
        std::vector<double> t(y.size());
        std::transform(y.begin(), y.end(), t.begin(), [](double v) { return std::exp(v) + v * v * v; });
        const auto a = pettitt(y);
        const auto b = pettitt(t);
        EXPECT_EQ(a.statistic, b.statistic);
        EXPECT_EQ(a.index, b.index);
        EXPECT_EQ(a.statistic, oracle::pettitt(y).value);
    }
}

TEST(MidRanks, TiesAveraged) {
    const auto r = mid_ranks(std::vector<double>{3.0, 1.0, 3.0, 2.0, 3.0});
    EXPECT_EQ(r, (std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0}));
}

TEST(BuishandPartialSums, AlternatingAndConstant) {
    EXPECT_EQ(buishand_partial_sums(alternating(4)), (std::vector<double>{0, 1, 0, 1, 0}));
    for (double s : buishand_partial_sums(std::vector<double>(8, 2.5))) EXPECT_EQ(s, 0.0);
}

TEST(BuishandPartialSums, TelescopesToZero) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
        auto y = oracle::gaussian(rng, 10 + k % 40, 5.0);
        for (auto& v : y) v += 25.0;
        const auto s = buishand_partial_sums(y);
        ASSERT_EQ(s.size(), y.size() + 1);
        EXPECT_EQ(s.front(), 0.0);
        double scale = 0.0;
        for (double v : y) scale = std::max(scale, std::abs(v));
        EXPECT_LE(std::abs(s.back()), 1e-9 * static_cast<double>(y.size()) * scale);
    }
}

TEST(BuishandLr, AlternatingTenPoints) {
    // |S*_m| is 1 at odd m; sigma = sqrt(10/9); the maximum sits at m = 1 (tied with m = 9):
    // 1 / (sqrt(10/9) * 3) = sqrt(0.1).
    const auto y = alternating(10);
    const auto cp = buishand_lr(y);
    EXPECT_NEAR(cp.statistic, std::sqrt(0.1), 1e-12);
    EXPECT_EQ(cp.index, 1u);
    const auto ref = oracle::buishand_v(y);
    EXPECT_NEAR(cp.statistic, ref.value, 1e-12);
    EXPECT_EQ(ref.index, 1u);
}

TEST(BuishandLr, FindsStep) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 20; ++k) {
        const auto y = step_series(rng, 40, 20, 2.0, 0.3);
        const auto cp = buishand_lr(y);
        EXPECT_LE(std::abs(static_cast<long>(cp.index) - 20), 1);
    }
}

TEST(BuishandU, AlternatingTenPoints) {
    // Five odd m with (S*/sigma)^2 = 0.9, divided by n(n+1) = 110.
    EXPECT_NEAR(buishand_u(alternating(10)), 4.5 / 110.0, 1e-12);
}

TEST(BuishandU, TimeReversalAndNonNegative) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 100; ++k) {
        auto y = oracle::gaussian(rng, 10 + k % 30);
        const double u = buishand_u(y);
        EXPECT_GE(u, 0.0);
        std::reverse(y.begin(), y.end());
        EXPECT_NEAR(buishand_u(y), u, 1e-9 * u);
        EXPECT_NEAR(oracle::buishand_u(y), u, 1e-9 * u);
    }
}

TEST(Buishand, DegenerateSeries) {
    EXPECT_THROW((void)buishand_lr(std::vector<double>(10, 1.0)), DegenerateSeriesError);
    EXPECT_THROW((void)buishand_u(std::vector<double>(10, 1.0)), DegenerateSeriesError);
}

TEST(AffineInvariance, StandardizedStatistics) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ua(0.1, 10.0);
    std::uniform_real_distribution<double> ub(-50.0, 50.0);
    for (int k = 0; k < 100; ++k) {
        const auto y = oracle::gaussian(rng, 10 + k % 30);
        const double a = ua(rng);
        const double b = ub(rng);
        std::vector<double> t(y.size());
        std::transform(y.begin(), y.end(), t.begin(), [&](double v) { return a * v + b; });
        for (homogeneity::Test test : {homogeneity::Test::SNHT, homogeneity::Test::BLRT, homogeneity::Test::BUT}) {
            const auto p = evaluate(test, y);
            const auto q = evaluate(test, t);
            EXPECT_NEAR(p.statistic, q.statistic, 1e-9 * std::max(1.0, p.statistic)) << to_string(test);
            if (test != homogeneity::Test::BUT) EXPECT_EQ(p.index, q.index);
        }
    }
}

TEST(MonteCarlo, ExtremeObservationHitsFloor) {
    std::vector<double> y(39);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (i < 20 ? 0.0 : 10.0) + 0.01 * static_cast<double>(i % 3);
    EXPECT_DOUBLE_EQ(monte_carlo_p(homogeneity::Test::SNHT, y, 20000, 7), 1.0 / 20001.0);
}

TEST(MonteCarlo, DeterministicPerSeed) {
    std::mt19937_64 rng(8);
    const auto y = oracle::gaussian(rng, 39);
    for (homogeneity::Test t : kAllTests) {
        const double a = monte_carlo_p(t, y, 2000, 123);
        const double b = monte_carlo_p(t, y, 2000, 123);
        EXPECT_EQ(a, b);
        EXPECT_GT(a, 0.0);
        EXPECT_LE(a, 1.0);
    }
}

TEST(MonteCarlo, ConstantSeriesPettittIsOne) {
    // Every permutation reproduces U = 0, so every draw counts.
    EXPECT_EQ(monte_carlo_p(homogeneity::Test::PETTITT, std::vector<double>(12, 1.0), 1000, 1), 1.0);
}

TEST(MonteCarlo, NullPValuesRoughlyUniform) {
    std::mt19937_64 rng(9);
    for (homogeneity::Test t : kAllTests) {
        double sum = 0.0;
        int below = 0;
        const int trials = 300;
        for (int k = 0; k < trials; ++k) {
            const auto y = oracle::gaussian(rng, 39);
            const double p = monte_carlo_p(t, y, 500, 1000 + static_cast<std::uint64_t>(k));
            sum += p;
            below += p < 0.25;
        }
        EXPECT_NEAR(sum / trials, 0.5, 0.06) << to_string(t);
        EXPECT_NEAR(below / static_cast<double>(trials), 0.25, 0.07) << to_string(t);
    }
}

TEST(Classify, TableRowsAndErrors) {
    EXPECT_EQ(classify(std::vector<double>{0.263, 0.0004, 0.0007, 0.182}), StationClass::B_DOUBTFUL);
    EXPECT_EQ(classify(std::vector<double>{0.352, 0.6173, 0.6053, 0.405}), StationClass::A_USEFUL);
    EXPECT_EQ(classify(std::vector<double>{0.127, 0.0044, 0.0049, 0.039}), StationClass::C_SUSPECT);
    EXPECT_EQ(classify(std::vector<double>{0.051, 0.0930, 0.0954, 0.046}), StationClass::A_USEFUL);
    EXPECT_EQ(count_rejections(std::vector<double>{0.0, 0.0, 0.0, 0.0}), 4u);
    EXPECT_EQ(classify(std::vector<double>{0.05, 0.05, 0.05, 0.05}), StationClass::A_USEFUL);
    EXPECT_THROW((void)classify(std::vector<double>{0.1, 0.2, 0.3}), InputError);
}

TEST(Battery, SeedsDerivedPerTestAndReproducible) {
    std::mt19937_64 rng(10);
    TestSeries s;
    s.values = oracle::gaussian(rng, 30);
    s.source = "ST1/DTR/annual";
    const auto a = run_battery(s, 1000, 5);
    const auto b = run_battery(s, 1000, 5);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(a.results[i].p_value, b.results[i].p_value);
        EXPECT_EQ(a.results[i].seed, b.results[i].seed);
        EXPECT_EQ(a.results[i].test, kAllTests[i]);
    }
    EXPECT_NE(a.results[0].seed, a.results[1].seed);
    EXPECT_FALSE(a.get(homogeneity::Test::BUT).change_point);
    EXPECT_TRUE(a.get(homogeneity::Test::SNHT).change_point);
    std::array<double, 4> p{};
    for (std::size_t i = 0; i < 4; ++i) p[i] = a.results[i].p_value;
    EXPECT_EQ(a.n_rejections, count_rejections(p));
}

TEST(TestSeriesFromAnnual, DropsMissing) {
    AnnualSeries a{"ST1", Variable::DTR, {{1990, 10.0, 12}, {1991, std::nullopt, 11}, {1992, 11.0, 12}}};
    const auto s = TestSeries::from_annual(a, "x");
    EXPECT_EQ(s.values, (std::vector<double>{10.0, 11.0}));
    EXPECT_EQ(s.years, (std::vector<int>{1990, 1992}));
    EXPECT_EQ(s.n_dropped, 1u);
}
