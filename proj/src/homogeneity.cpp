#include "hometrend/homogeneity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "hometrend/errors.hpp"
#include "hometrend/seeding.hpp"

namespace hometrend::homogeneity {

namespace {

void require_length(std::span<const double> values, const TestOptions& opts, Test test) {
    if (values.size() < opts.min_n || values.size() < 2)
        throw TooShortError(fmt::format("{} needs at least {} values, got {}", to_string(test),
                                        std::max<std::size_t>(opts.min_n, 2), values.size()));
}

// Deviations from the mean divided by the chosen standard deviation.
std::vector<double> standardize(std::span<const double> values, SigmaDivisor divisor, Test test) {
    const auto n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    double scale = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
        scale = std::max(scale, std::abs(v));
    }
    const double denom = divisor == SigmaDivisor::POPULATION ? n : n - 1.0;
    const double sigma = std::sqrt(ss / denom);
    if (!(sigma > 1e-12 * std::max(1.0, scale)))
        throw DegenerateSeriesError(
            fmt::format("{}: series has zero variance", to_string(test)));
    std::vector<double> z(values.size());
    std::transform(values.begin(), values.end(), z.begin(),
                   [&](double v) { return (v - mean) / sigma; });
    return z;
}

// Argmax with ties (to rounding) resolved toward the smallest index.
bool improves(double candidate, double best) {
    return candidate > best + 1e-12 * std::max(1.0, std::abs(best));
}

// The statistics below take standardized deviations (or ranks for Pettitt),
// which are permutation-invariant as a multiset; Monte Carlo draws shuffle them.

ChangePoint snht_from_z(std::span<const double> z) {
    const std::size_t n = z.size();
    const double total = std::accumulate(z.begin(), z.end(), 0.0);
    ChangePoint best{-1.0, 1};
    double cum = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
        cum += z[m - 1];
        const double rest = total - cum;
        const double t = cum * cum / static_cast<double>(m) + rest * rest / static_cast<double>(n - m);
        if (improves(t, best.statistic)) best = {t, m};
    }
    return best;
}

ChangePoint pettitt_from_ranks(std::span<const double> ranks) {
    const std::size_t n = ranks.size();
    const double np1 = static_cast<double>(n + 1);
    ChangePoint best{-1.0, 1};
    double cum = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
        cum += ranks[m - 1];
        const double u = std::abs(2.0 * cum - static_cast<double>(m) * np1);
        if (improves(u, best.statistic)) best = {u, m};
    }
    return best;
}

ChangePoint blrt_from_z(std::span<const double> z) {
    const std::size_t n = z.size();
    ChangePoint best{-1.0, 1};
    double cum = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
        cum += z[m - 1];
        const double v =
            std::abs(cum) / std::sqrt(static_cast<double>(m) * static_cast<double>(n - m));
        if (improves(v, best.statistic)) best = {v, m};
    }
    return best;
}

double but_from_z(std::span<const double> z) {
    const std::size_t n = z.size();
    double cum = 0.0;
    double acc = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
        cum += z[m - 1];
        acc += cum * cum;
    }
    return acc / (static_cast<double>(n) * static_cast<double>(n + 1));
}

// Transformed data each test operates on, prepared once per series.
std::vector<double> prepare(Test test, std::span<const double> values, const TestOptions& opts) {
    require_length(values, opts, test);
    switch (test) {
        case Test::SNHT: return standardize(values, opts.snht_sigma, test);
        case Test::PETTITT: return mid_ranks(values);
        case Test::BLRT:
        case Test::BUT: return standardize(values, opts.buishand_sigma, test);
    }
    throw std::logic_error("unknown test");
}

ChangePoint statistic_of(Test test, std::span<const double> prepared) {
    switch (test) {
        case Test::SNHT: return snht_from_z(prepared);
        case Test::PETTITT: return pettitt_from_ranks(prepared);
        case Test::BLRT: return blrt_from_z(prepared);
        case Test::BUT: return {but_from_z(prepared), 0};
    }
    throw std::logic_error("unknown test");
}

}  // namespace

std::string_view to_string(Test t) {
    switch (t) {
        case Test::SNHT: return "SNHT";
        case Test::PETTITT: return "PETTITT";
        case Test::BLRT: return "BLRT";
        case Test::BUT: return "BUT";
    }
    return "?";
}

std::string_view to_string(StationClass c) {
    switch (c) {
        case StationClass::A_USEFUL: return "A (Useful)";
        case StationClass::B_DOUBTFUL: return "B (Doubtful)";
        case StationClass::C_SUSPECT: return "C (Suspect)";
    }
    return "?";
}

TestSeries TestSeries::from_annual(const AnnualSeries& s, std::string source) {
    TestSeries out;
    out.source = std::move(source);
    for (const auto& e : s.entries) {
        if (e.mean) {
            out.values.push_back(*e.mean);
            out.years.push_back(e.year);
        } else {
            ++out.n_dropped;
        }
    }
    return out;
}

const HomogeneityTestResult& HomogeneityBattery::get(Test t) const {
    return results[static_cast<std::size_t>(t)];
}

std::vector<double> mid_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

ChangePoint snht(std::span<const double> values, const TestOptions& opts) {
    return evaluate(Test::SNHT, values, opts);
}

ChangePoint pettitt(std::span<const double> values, const TestOptions& opts) {
    return evaluate(Test::PETTITT, values, opts);
}

ChangePoint buishand_lr(std::span<const double> values, const TestOptions& opts) {
    return evaluate(Test::BLRT, values, opts);
}

double buishand_u(std::span<const double> values, const TestOptions& opts) {
    return evaluate(Test::BUT, values, opts).statistic;
}

std::vector<double> buishand_partial_sums(std::span<const double> values) {
    std::vector<double> sums(values.size() + 1, 0.0);
    if (values.empty()) return sums;
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    for (std::size_t m = 1; m <= values.size(); ++m) sums[m] = sums[m - 1] + (values[m - 1] - mean);
    return sums;
}

ChangePoint evaluate(Test test, std::span<const double> values, const TestOptions& opts) {
    const auto prepared = prepare(test, values, opts);
    return statistic_of(test, prepared);
}

double monte_carlo_p(Test test, std::span<const double> values, std::size_t n_sims,
                     std::uint64_t seed, const TestOptions& opts) {
    if (n_sims == 0) throw InputError("n_sims must be positive");
    auto buffer = prepare(test, values, opts);
    const double observed = statistic_of(test, buffer).statistic;
    // Rebuilding the statistic from a permuted copy can differ from the
    // observed value in the last bits even when the draw is equivalent.
    const double threshold = observed - 1e-10 * std::max(1.0, std::abs(observed));

    std::mt19937_64 rng(seed);
    std::size_t exceed = 0;
    for (std::size_t s = 0; s < n_sims; ++s) {
        std::shuffle(buffer.begin(), buffer.end(), rng);
        if (statistic_of(test, buffer).statistic >= threshold) ++exceed;
    }
    return static_cast<double>(exceed + 1) / static_cast<double>(n_sims + 1);
}

HomogeneityTestResult run_test(Test test, const TestSeries& series, std::size_t n_sims,
                               std::uint64_t seed, const TestOptions& opts) {
    const auto cp = evaluate(test, series.values, opts);
    HomogeneityTestResult r;
    r.test = test;
    r.statistic = cp.statistic;
    if (test != Test::BUT) r.change_point = cp.index;
    r.p_value = monte_carlo_p(test, series.values, n_sims, seed, opts);
    r.n_sims = n_sims;
    r.seed = seed;
    return r;
}

unsigned count_rejections(std::span<const double> p_values, double alpha) {
    if (p_values.size() != 4)
        throw InputError(fmt::format("classification needs 4 p-values, got {}", p_values.size()));
    return static_cast<unsigned>(
        std::count_if(p_values.begin(), p_values.end(), [&](double p) { return p < alpha; }));
}

StationClass classify(std::span<const double> p_values, double alpha) {
    const unsigned rejects = count_rejections(p_values, alpha);
    if (rejects <= 1) return StationClass::A_USEFUL;
    if (rejects == 2) return StationClass::B_DOUBTFUL;
    return StationClass::C_SUSPECT;
}

HomogeneityBattery run_battery(const TestSeries& series, std::size_t n_sims,
                               std::uint64_t run_seed, double alpha, const TestOptions& opts) {
    HomogeneityBattery battery;
    battery.alpha = alpha;
    std::array<double, 4> p{};
    for (std::size_t i = 0; i < kAllTests.size(); ++i) {
        const Test t = kAllTests[i];
        const auto seed = derive_seed(run_seed, fmt::format("{}/{}", series.source, to_string(t)));
        battery.results[i] = run_test(t, series, n_sims, seed, opts);
        p[i] = battery.results[i].p_value;
    }
    battery.n_rejections = count_rejections(p, alpha);
    battery.station_class = classify(p, alpha);
    return battery;
}

}  // namespace hometrend::homogeneity
