#pragma once

// Slow reference implementations used only to check the fast paths. They
// share no code with knn.hpp or twonn.hpp: distances are accumulated in
// long double and neighbor lists come from a full sort.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "lidscope/point_cloud.hpp"

namespace lidscope::oracles {

inline long double distance_ld(std::span<const double> a, std::span<const double> b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

/// Kahan-compensated double accumulation of the squared distance.
inline double distance_compensated(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0, c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        const double y = d * d - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return std::sqrt(sum);
}

struct NaiveNeighbors {
    std::vector<std::vector<std::size_t>> indices;
    std::vector<std::vector<long double>> distances;
};

/// All-pairs distances, full stable sort per row, truncate to k.
inline NaiveNeighbors knn_full_sort(const PointCloud& cloud, std::size_t k, bool include_self) {
    const std::size_t n = cloud.n_points();
    NaiveNeighbors out;
    out.indices.resize(n);
    out.distances.resize(n);
    std::vector<long double> d(n);
    std::vector<std::size_t> order(n);
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t j = 0; j < n; ++j) d[j] = distance_ld(cloud.row(q), cloud.row(j));
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
        for (std::size_t j : order) {
            if (!include_self && j == q) continue;
            if (out.indices[q].size() == k) break;
            out.indices[q].push_back(j);
            out.distances[q].push_back(d[j]);
        }
    }
    return out;
}

inline long double hausdorff_double_loop(const PointCloud& a, const PointCloud& b) {
    auto directed = [](const PointCloud& x, const PointCloud& y) {
        long double worst = 0.0L;
        for (std::size_t i = 0; i < x.n_points(); ++i) {
            long double best = INFINITY;
            for (std::size_t j = 0; j < y.n_points(); ++j) best = std::min(best, distance_ld(x.row(i), y.row(j)));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

/// Global TwoNN ratios straight from the definition: for each point, the two
/// smallest distances to any other point.
inline std::vector<long double> twonn_ratios_direct(const PointCloud& cloud) {
    std::vector<long double> mus;
    for (std::size_t i = 0; i < cloud.n_points(); ++i) {
        std::vector<long double> d;
        for (std::size_t j = 0; j < cloud.n_points(); ++j)
            if (j != i) d.push_back(distance_ld(cloud.row(i), cloud.row(j)));
        std::partial_sort(d.begin(), d.begin() + 2, d.end());
        if (d[0] > 0) mus.push_back(d[1] / d[0]);
    }
    return mus;
}

/// Zero-intercept least squares of -log(1 - i/n) on log(mu_(i)) over the
/// smallest `kept` ratios in closed form.
inline long double linfit_direct(std::vector<long double> mus, std::size_t kept) {
    std::sort(mus.begin(), mus.end());
    const auto n = static_cast<long double>(mus.size());
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < kept; ++i) {
        const long double x = std::log(mus[i]);
        const long double y = -std::log(1.0L - static_cast<long double>(i + 1) / n);
        num += x * y;
        den += x * x;
    }
    return num / den;
}

/// Sample moments and type-7 quantiles computed from scratch.
struct DirectStats {
    long double mean, std, q1, median, q3;
};

inline DirectStats direct_stats(std::vector<double> v) {
    const auto n = static_cast<long double>(v.size());
    long double s = 0.0L;
    for (double x : v) s += x;
    const long double mean = s / n;
    long double ss = 0.0L;
    for (double x : v) ss += (x - mean) * (x - mean);
    std::sort(v.begin(), v.end());
    auto q = [&](long double p) {
        const long double pos = p * (n - 1.0L);
        const auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= v.size()) return static_cast<long double>(v.back());
        return v[i] + (pos - static_cast<long double>(i)) * (static_cast<long double>(v[i + 1]) - v[i]);
    };
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0L)) : 0.0L, q(0.25L), q(0.5L), q(0.75L)};
}

}  // namespace lidscope::oracles
