#pragma once

// Direct-evaluation reference implementations used only by tests. Each one
// follows the textbook definition term by term (quadratic loops, no shared
// helpers with the library) so it can check the optimized kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline double mean(const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += v;
    return s / static_cast<double>(y.size());
}

inline double stddev(const std::vector<double>& y, bool population) {
    const double m = mean(y);
    double ss = 0.0;
    for (double v : y) ss += (v - m) * (v - m);
    const double n = static_cast<double>(y.size());
    return std::sqrt(ss / (population ? n : n - 1.0));
}

struct Argmax {
    double value = -1.0;
    std::size_t index = 0;
};

// Values equal up to rounding count as ties; the first index wins.
inline bool beats(double v, double best) { return v > best + 1e-12 * std::max(1.0, std::abs(best)); }

inline Argmax snht(const std::vector<double>& y, bool population = true) {
    const std::size_t n = y.size();
    const double ybar = mean(y);
    const double sigma = stddev(y, population);
    Argmax best;
    for (std::size_t m = 1; m < n; ++m) {
        double z1 = 0.0;
        for (std::size_t i = 0; i < m; ++i) z1 += (y[i] - ybar) / sigma;
        z1 /= static_cast<double>(m);
        double z2 = 0.0;
        for (std::size_t i = m; i < n; ++i) z2 += (y[i] - ybar) / sigma;
        z2 /= static_cast<double>(n - m);
        const double t = static_cast<double>(m) * z1 * z1 + static_cast<double>(n - m) * z2 * z2;
        if (beats(t, best.value)) best = {t, m};
    }
    return best;
}

// Rank by counting: 1 + #smaller + (#equal others)/2.
inline std::vector<double> ranks(const std::vector<double>& y) {
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        double smaller = 0.0;
        double equal = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (j == i) continue;
            if (y[j] < y[i]) smaller += 1.0;
            if (y[j] == y[i]) equal += 1.0;
        }
        r[i] = 1.0 + smaller + equal / 2.0;
    }
    return r;
}

inline Argmax pettitt(const std::vector<double>& y) {
    const auto r = ranks(y);
    const std::size_t n = y.size();
    Argmax best;
    for (std::size_t m = 1; m < n; ++m) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += r[i];
        const double u = std::abs(2.0 * sum - static_cast<double>(m) * static_cast<double>(n + 1));
        if (beats(u, best.value)) best = {u, m};
    }
    return best;
}

inline double partial_sum(const std::vector<double>& y, std::size_t m) {
    const double ybar = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += y[i] - ybar;
    return s;
}

inline Argmax buishand_v(const std::vector<double>& y) {
    const std::size_t n = y.size();
    const double sigma = stddev(y, false);
    Argmax best;
    for (std::size_t m = 1; m < n; ++m) {
        const double v = std::abs(partial_sum(y, m)) /
                         (sigma * std::sqrt(static_cast<double>(m) * static_cast<double>(n - m)));
        if (beats(v, best.value)) best = {v, m};
    }
    return best;
}

inline double buishand_u(const std::vector<double>& y) {
    const std::size_t n = y.size();
    const double sigma = stddev(y, false);
    double acc = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
        const double s = partial_sum(y, m) / sigma;
        acc += s * s;
    }
    return acc / (static_cast<double>(n) * static_cast<double>(n + 1));
}

inline std::int64_t mk_s(const std::vector<double>& x) {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) s += (x[j] > x[i]) - (x[j] < x[i]);
    return s;
}

// Tie-corrected variance with tie groups found by pairwise counting.
inline double mk_var(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double ties = 0.0;
    std::vector<bool> seen(x.size(), false);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (seen[i]) continue;
        double t = 0.0;
        for (std::size_t j = i; j < x.size(); ++j)
            if (x[j] == x[i]) {
                seen[j] = true;
                t += 1.0;
            }
        if (t > 1.0) ties += t * (t - 1.0) * (2.0 * t + 5.0);
    }
    return (n * (n - 1.0) * (2.0 * n + 5.0) - ties) / 18.0;
}

// Exact Var(S) under the permutation null: enumerate every ordering of x.
inline double mk_var_by_enumeration(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    double sum = 0.0;
    double sum_sq = 0.0;
    double count = 0.0;
    do {
        const auto s = static_cast<double>(mk_s(x));
        sum += s;
        sum_sq += s * s;
        count += 1.0;
    } while (std::next_permutation(x.begin(), x.end()));
    const double m = sum / count;
    return sum_sq / count - m * m;
}

inline double mk_z(std::int64_t s, double var) {
    if (s > 0) return (static_cast<double>(s) - 1.0) / std::sqrt(var);
    if (s < 0) return (static_cast<double>(s) + 1.0) / std::sqrt(var);
    return 0.0;
}

// Median of pairwise slopes found by counting order statistics, no sorting.
inline double sen(const std::vector<double>& t, const std::vector<double>& x) {
    std::vector<double> slopes;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (t[j] != t[i]) slopes.push_back((x[j] - x[i]) / (t[j] - t[i]));
    const std::size_t k = slopes.size();
    auto kth = [&](std::size_t want) {  // 0-based order statistic
        for (double c : slopes) {
            std::size_t less = 0;
            std::size_t less_eq = 0;
            for (double d : slopes) {
                less += d < c;
                less_eq += d <= c;
            }
            if (less <= want && want < less_eq) return c;
        }
        return slopes.front();
    };
    return k % 2 == 1 ? kth(k / 2) : 0.5 * (kth(k / 2 - 1) + kth(k / 2));
}

inline std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double sd = 1.0) {
    std::normal_distribution<double> d(0.0, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace oracle
