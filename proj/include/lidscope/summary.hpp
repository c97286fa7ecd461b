#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lidscope/error.hpp"

namespace lidscope {

/// Distribution summary of a vector of estimates.
struct EstimateSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, denominator n - 1
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;

    bool operator==(const EstimateSummary&) const = default;
};

/// Quantile of sorted data by linear interpolation between order statistics
/// at position p * (n - 1).
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ArgumentError("quantile of empty sample");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double mean_of(std::span<const double> v) {
    if (v.empty()) throw ArgumentError("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Two-pass sample standard deviation; 0 for a single value.
inline double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline EstimateSummary summarize(std::span<const double> values) {
    if (values.empty()) throw ArgumentError("cannot summarize an empty estimate vector");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    EstimateSummary s;
    s.count = values.size();
    s.mean = mean_of(values);
    s.std = sample_std(values);
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q3 = quantile_sorted(sorted, 0.75);
    return s;
}

}  // namespace lidscope
