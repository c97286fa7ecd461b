#pragma once

// TwoNN intrinsic dimension estimation and its L-local variant.
//
// For every point the ratio mu = r2 / r1 of its second- to first-nearest
// neighbor distance follows a Pareto law whose shape is the intrinsic
// dimension. Two fits are provided: the zero-intercept regression of
// -log(1 - F(mu)) on log(mu) ("linfit") and the Pareto shape maximum
// likelihood estimate ("mle").

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidscope/error.hpp"
#include "lidscope/knn.hpp"
#include "lidscope/log.hpp"
#include "lidscope/parallel.hpp"
#include "lidscope/point_cloud.hpp"
#include "lidscope/summary.hpp"

namespace lidscope {

enum class Estimator { linfit, mle };

inline std::string_view to_string(Estimator e) noexcept { return e == Estimator::mle ? "mle" : "linfit"; }

inline Estimator parse_estimator(std::string_view s) {
    if (s == "linfit") return Estimator::linfit;
    if (s == "mle") return Estimator::mle;
    throw ArgumentError("unknown estimator '" + std::string(s) + "' (expected linfit or mle)");
}

struct EstimatorOptions {
    Estimator estimator = Estimator::linfit;
    /// Fraction of the largest ratios ignored by the linear fit.
    double discard_fraction = 0.1;
    /// Apply discard_fraction inside every local neighborhood as well; when
    /// false local linear fits keep all ratios.
    bool discard_in_neighborhoods = true;

    void validate() const {
        if (!(discard_fraction >= 0.0 && discard_fraction < 1.0))
            throw ArgumentError("discard fraction must lie in [0, 1)");
    }
};

struct RatioSample {
    std::vector<double> mus;  // r2 / r1 of every retained point
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;  // points with r1 == 0 or a non-finite ratio
};

/// Builds a RatioSample from per-point first and second neighbor distances.
inline RatioSample ratios_from_distances(std::span<const double> r1, std::span<const double> r2) {
    RatioSample s;
    s.mus.reserve(r1.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        const double mu = r2[i] / r1[i];
        if (r1[i] > 0.0 && std::isfinite(mu)) {
            s.mus.push_back(mu);
        } else {
            ++s.n_dropped;
        }
    }
    s.n_used = s.mus.size();
    return s;
}

inline RatioSample twonn_ratios(const PointCloud& cloud, std::size_t threads = 0) {
    if (cloud.n_points() < 3)
        throw ArgumentError("TwoNN needs at least 3 points, got " + std::to_string(cloud.n_points()));
    const auto g = knn_exact(cloud, 2, false, threads);
    std::vector<double> r1(g.n_queries), r2(g.n_queries);
    for (std::size_t q = 0; q < g.n_queries; ++q) {
        r1[q] = g.distances[2 * q];
        r2[q] = g.distances[2 * q + 1];
    }
    auto sample = ratios_from_distances(r1, r2);
    if (sample.n_used == 0) throw DegenerateError("every point has a zero nearest-neighbor distance");
    if (sample.n_dropped > 0)
        log::warn(std::to_string(sample.n_dropped) +
                  " point(s) with zero nearest-neighbor distance dropped from the TwoNN fit");
    return sample;
}

namespace detail {

/// Number of largest ratios removed by a discard fraction. The small slack
/// keeps products such as 0.1 * 30 from rounding up past an integer.
inline std::size_t discard_count(double fraction, std::size_t n) {
    return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

inline std::vector<double> sorted_mus(const RatioSample& s) {
    std::vector<double> mus = s.mus;
    std::sort(mus.begin(), mus.end());
    return mus;
}

}  // namespace detail

/// Minimum number of ratios a linear fit needs to keep.
inline constexpr std::size_t kMinFitPoints = 3;

/// Number of (log mu, -log(1 - F)) points the linear fit uses.
inline std::size_t linfit_kept(std::size_t n, double discard_fraction) {
    const std::size_t drop = detail::discard_count(discard_fraction, n);
    const std::size_t kept = drop >= n ? 0 : n - drop;
    return std::min(kept, n == 0 ? 0 : n - 1);
}

inline double fit_dimension_linfit(const RatioSample& sample, double discard_fraction) {
    if (!(discard_fraction >= 0.0 && discard_fraction < 1.0))
        throw ArgumentError("discard fraction must lie in [0, 1)");
    const std::size_t n = sample.mus.size();
    const std::size_t kept = linfit_kept(n, discard_fraction);
    if (kept < kMinFitPoints)
        throw ArgumentError("linear fit needs at least " + std::to_string(kMinFitPoints) +
                            " ratios after discarding, have " + std::to_string(kept));
    const auto mus = detail::sorted_mus(sample);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < kept; ++i) {
        const double x = std::log(mus[i]);
        const double y = -std::log1p(-static_cast<double>(i + 1) / static_cast<double>(n));
        sxx += x * x;
        sxy += x * y;
    }
    if (sxx == 0.0) throw DegenerateError("all retained ratios equal 1; slope undefined");
    return sxy / sxx;
}

inline double fit_dimension_mle(const RatioSample& sample) {
    if (sample.mus.size() < 2) throw ArgumentError("Pareto MLE needs at least 2 ratios");
    double sum_log = 0.0;
    for (double mu : detail::sorted_mus(sample)) sum_log += std::log(mu);
    if (sum_log == 0.0) throw DegenerateError("all ratios equal 1; Pareto shape undefined");
    return static_cast<double>(sample.mus.size()) / sum_log;
}

inline double fit_dimension(const RatioSample& sample, Estimator estimator, double discard_fraction) {
    return estimator == Estimator::mle ? fit_dimension_mle(sample)
                                       : fit_dimension_linfit(sample, discard_fraction);
}

/// Global TwoNN estimate of a whole cloud.
inline double twonn_global(const PointCloud& cloud, const EstimatorOptions& opts = {},
                           std::size_t threads = 0) {
    opts.validate();
    return fit_dimension(twonn_ratios(cloud, threads), opts.estimator, opts.discard_fraction);
}

/// One estimate per row of the (already subsampled) cloud.
struct LocalEstimates {
    std::vector<double> values;
    SamplingConfig params;
    std::size_t n_degenerate = 0;     // neighborhoods whose fit failed (value 0)
    std::size_t n_zero_distance = 0;  // ratios dropped for r1 == 0 across all neighborhoods
};

namespace detail {

/// TwoNN fit restricted to one neighborhood given by row ids into `cloud`.
/// Uses the same distance kernel as knn_exact so that a neighborhood equal
/// to the whole cloud reproduces twonn_global exactly.
class NeighborhoodFitter {
public:
    explicit NeighborhoodFitter(std::size_t L) : dist_(L * L), r1_(L), r2_(L) {}

    /// Returns the fitted dimension, or nullopt when the neighborhood is
    /// degenerate. `dropped` receives the number of zero-distance points.
    std::optional<double> fit(const PointCloud& cloud, std::span<const std::size_t> members,
                              Estimator estimator, double discard_fraction, std::size_t& dropped) {
        const std::size_t L = members.size();
        const std::size_t dim = cloud.dim();
        const double* base = cloud.data().data();
        for (std::size_t a = 0; a < L; ++a) {
            dist_[a * L + a] = 0.0;
            for (std::size_t b = a + 1; b < L; ++b) {
                const double d = std::sqrt(squared_distance(base + members[a] * dim, base + members[b] * dim, dim));
                dist_[a * L + b] = d;
                dist_[b * L + a] = d;
            }
        }
        for (std::size_t a = 0; a < L; ++a) {
            double best = INFINITY, second = INFINITY;
            for (std::size_t b = 0; b < L; ++b) {
                if (b == a) continue;
                const double d = dist_[a * L + b];
                if (d < best) {
                    second = best;
                    best = d;
                } else if (d < second) {
                    second = d;
                }
            }
            r1_[a] = best;
            r2_[a] = second;
        }
        const auto sample = ratios_from_distances(std::span(r1_).first(L), std::span(r2_).first(L));
        dropped = sample.n_dropped;
        const bool enough = estimator == Estimator::mle
                                ? sample.mus.size() >= 2
                                : linfit_kept(sample.mus.size(), discard_fraction) >= kMinFitPoints;
        if (!enough) return std::nullopt;
        try {
            return fit_dimension(sample, estimator, discard_fraction);
        } catch (const DegenerateError&) {
            return std::nullopt;
        }
    }

private:
    std::vector<double> dist_;
    std::vector<double> r1_, r2_;
};

}  // namespace detail

/// L-local TwoNN: for each point v, the estimate of the neighborhood made of
/// v and its L - 1 nearest neighbors. Degenerate neighborhoods yield 0 and a
/// warning. The result is bit-identical for every thread count.
inline LocalEstimates local_twonn(const PointCloud& cloud, const SamplingConfig& config,
                                  const EstimatorOptions& opts = {}, std::size_t threads = 0) {
    opts.validate();
    const std::size_t L = config.n_neighbors;
    if (L < 3) throw ArgumentError("local TwoNN needs a neighborhood size of at least 3");
    if (L > cloud.n_points())
        throw ArgumentError("neighborhood size " + std::to_string(L) + " exceeds the " +
                            std::to_string(cloud.n_points()) + " available points");
    const double discard = opts.discard_in_neighborhoods ? opts.discard_fraction : 0.0;
    if (opts.estimator == Estimator::linfit && linfit_kept(L, discard) < kMinFitPoints)
        throw ArgumentError("neighborhood size " + std::to_string(L) +
                            " leaves too few ratios for the linear fit");

    const auto graph = knn_exact(cloud, L - 1, false, threads);
    const std::size_t n = cloud.n_points();
    LocalEstimates out;
    out.params = config;
    out.values.assign(n, 0.0);
    std::vector<char> degenerate(n, 0);
    std::vector<std::size_t> dropped(n, 0);

    parallel_for(n, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
        detail::NeighborhoodFitter fitter(L);
        std::vector<std::size_t> members(L);
        for (std::size_t v = begin; v < end; ++v) {
            members[0] = v;
            const auto nb = graph.neighbors(v);
            std::copy(nb.begin(), nb.end(), members.begin() + 1);
            const auto d = fitter.fit(cloud, members, opts.estimator, discard, dropped[v]);
            if (d) {
                out.values[v] = std::max(0.0, *d);
            } else {
                degenerate[v] = 1;
            }
        }
    });

    for (std::size_t v = 0; v < n; ++v) {
        out.n_zero_distance += dropped[v];
        if (degenerate[v]) {
            ++out.n_degenerate;
            log::warn("degenerate neighborhood at row " + std::to_string(v) + "; estimate set to 0");
        }
    }
    if (out.n_zero_distance > 0)
        log::warn(std::to_string(out.n_zero_distance) +
                  " zero nearest-neighbor distance(s) inside neighborhoods; was the cloud de-duplicated?");
    return out;
}

inline EstimateSummary summarize(const LocalEstimates& estimates) { return summarize(estimates.values); }

}  // namespace lidscope
