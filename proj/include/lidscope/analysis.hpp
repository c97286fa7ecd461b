#pragma once

// Experiment-level computations on top of local estimates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lidscope/csv.hpp"
#include "lidscope/error.hpp"
#include "lidscope/knn.hpp"
#include "lidscope/lide_io.hpp"
#include "lidscope/log.hpp"
#include "lidscope/pipeline.hpp"
#include "lidscope/point_cloud.hpp"
#include "lidscope/random.hpp"
#include "lidscope/summary.hpp"
#include "lidscope/twonn.hpp"

namespace lidscope {

// ---------------------------------------------------------------------------
// Cohort comparison

struct ComparisonReport {
    EstimateSummary summary_a;
    EstimateSummary summary_b;
    double delta_mean = 0.0;
    double smd = 0.0;  // Cohen's d with pooled sample standard deviation
};

inline ComparisonReport compare_cohorts(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ArgumentError("cohorts must be non-empty");
    ComparisonReport r;
    r.summary_a = summarize(a);
    r.summary_b = summarize(b);
    r.delta_mean = r.summary_a.mean - r.summary_b.mean;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double dof = na + nb - 2.0;
    const double pooled_var =
        dof > 0 ? ((na - 1.0) * r.summary_a.std * r.summary_a.std + (nb - 1.0) * r.summary_b.std * r.summary_b.std) / dof
                : 0.0;
    const double pooled = std::sqrt(pooled_var);
    if (r.delta_mean == 0.0) {
        r.smd = 0.0;
    } else if (pooled == 0.0) {
        throw DegenerateError("pooled standard deviation is zero but cohort means differ");
    } else {
        r.smd = r.delta_mean / pooled;
    }
    return r;
}

inline ComparisonReport compare_cohorts(const LocalEstimates& a, const LocalEstimates& b) {
    if (a.params != b.params) log::warn("comparing cohorts produced with different sampling parameters");
    return compare_cohorts(a.values, b.values);
}

/// Per-token differences a - b between two models evaluated on the identical
/// token subsample, metadata carried along.
struct PairedDelta {
    std::vector<double> delta;
    std::optional<std::vector<TokenMeta>> meta;
};

inline PairedDelta paired_token_compare(std::span<const double> a, std::span<const double> b,
                                        const std::optional<std::vector<TokenMeta>>& meta = std::nullopt) {
    if (a.size() != b.size())
        throw AlignmentError("paired estimates differ in length: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    if (meta && meta->size() != a.size())
        throw AlignmentError("metadata length does not match the paired estimates");
    PairedDelta out;
    out.delta.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.delta[i] = a[i] - b[i];
    out.meta = meta;
    return out;
}

// ---------------------------------------------------------------------------
// Noise and Hausdorff distance

/// Adds independent N(0, sigma^2) noise to every coordinate. Coordinate k
/// uses normal draw k of the seeded stream.
inline PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("noise sigma must be finite and >= 0");
    if (sigma == 0.0) return cloud;
    const CounterRng rng(seed);
    std::vector<double> data(cloud.data().begin(), cloud.data().end());
    for (std::size_t k = 0; k < data.size(); ++k) data[k] += sigma * standard_normal_at(rng, k);
    return PointCloud(cloud.n_points(), cloud.dim(), std::move(data), cloud.meta(), cloud.precision());
}

/// max over rows x of `from` of the distance from x to its nearest row of `to`.
inline double directed_hausdorff(const PointCloud& from, const PointCloud& to, std::size_t threads = 0) {
    const auto g = knn_cross(from, to, 1, threads);
    double h = 0.0;
    for (double d : g.distances) h = std::max(h, d);
    return h;
}

struct HausdorffOptions {
    /// When set, only a seeded subsample of this size from each side is used
    /// as queries against the full other side. The result is a lower bound.
    std::optional<std::size_t> approx_subsample;
    std::uint64_t seed = 0;
};

inline double hausdorff(const PointCloud& a, const PointCloud& b, const HausdorffOptions& opts = {},
                        std::size_t threads = 0) {
    if (a.dim() != b.dim()) throw ArgumentError("Hausdorff distance between clouds of different dimension");
    if (a.empty() || b.empty()) throw ArgumentError("Hausdorff distance of an empty set");
    if (opts.approx_subsample) {
        if (*opts.approx_subsample == 0) throw ArgumentError("approximate Hausdorff subsample must be >= 1");
        const auto sa = subsample_tokens(a, *opts.approx_subsample, derive_seed(opts.seed, 0));
        const auto sb = subsample_tokens(b, *opts.approx_subsample, derive_seed(opts.seed, 1));
        return std::max(directed_hausdorff(sa, b, threads), directed_hausdorff(sb, a, threads));
    }
    return std::max(directed_hausdorff(a, b, threads), directed_hausdorff(b, a, threads));
}

struct NoiseReport {
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double hausdorff = 0.0;
    bool hausdorff_approximate = false;
    double global_clean = 0.0;
    double global_noisy = 0.0;
    double mean_local_clean = 0.0;
    double mean_local_noisy = 0.0;
    double std_local_clean = 0.0;
    double std_local_noisy = 0.0;
};

struct NoiseSweepOptions {
    std::vector<double> sigmas;
    std::vector<std::uint64_t> seeds;
    SamplingConfig config;
    EstimatorOptions estimator;
    HausdorffOptions hausdorff;
};

/// Noise is applied after sampling, to the exact token set the estimates
/// are computed on. The clean estimates are shared by every row.
inline std::vector<NoiseReport> noise_sweep(const PointCloud& cloud, const NoiseSweepOptions& opts,
                                            std::size_t threads = 0) {
    if (opts.sigmas.empty() || opts.seeds.empty()) throw ArgumentError("noise sweep needs sigmas and seeds");
    for (double s : opts.sigmas)
        if (!(s >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
    const auto clean = prepare_sample(cloud, opts.config).cloud;
    const double global_clean = twonn_global(clean, opts.estimator, threads);
    const auto local_clean = summarize(local_twonn(clean, opts.config, opts.estimator, threads).values);

    std::vector<NoiseReport> rows;
    for (double sigma : opts.sigmas) {
        for (std::uint64_t seed : opts.seeds) {
            NoiseReport r;
            r.sigma = sigma;
            r.seed = seed;
            r.global_clean = global_clean;
            r.mean_local_clean = local_clean.mean;
            r.std_local_clean = local_clean.std;
            if (sigma == 0.0) {
                r.global_noisy = global_clean;
                r.mean_local_noisy = local_clean.mean;
                r.std_local_noisy = local_clean.std;
            } else {
                const auto noisy = add_gaussian_noise(clean, sigma, seed);
                HausdorffOptions h = opts.hausdorff;
                h.seed = derive_seed(seed, 7);
                r.hausdorff = hausdorff(clean, noisy, h, threads);
                r.hausdorff_approximate = h.approx_subsample.has_value();
                r.global_noisy = twonn_global(noisy, opts.estimator, threads);
                const auto local = summarize(local_twonn(noisy, opts.config, opts.estimator, threads).values);
                r.mean_local_noisy = local.mean;
                r.std_local_noisy = local.std;
            }
            rows.push_back(r);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Hyperparameter sensitivity

struct SweepGrid {
    std::vector<std::size_t> m_values;  // SamplingConfig::kAllSequences for "all"
    std::vector<std::size_t> n_values;
    std::vector<std::size_t> l_values;
    std::vector<std::uint64_t> seeds;
};

struct SweepRow {
    std::string split;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t l = 0;
    std::uint64_t seed = 0;
    std::optional<EstimateSummary> summary;  // empty when the cell failed
    std::size_t n_sampled = 0;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // one per split x cell x seed, in grid order

    std::vector<const SweepRow*> failures() const {
        std::vector<const SweepRow*> out;
        for (const auto& r : rows)
            if (!r.summary) out.push_back(&r);
        return out;
    }
};

/// Runs the full pipeline for every grid cell and seed. Cell failures are
/// recorded in the row and the sweep continues. The seed drives sequence
/// selection and token subsampling the same way for every cell, so cells
/// differing only in N share a token-sample prefix.
inline SweepResult sensitivity_sweep(const std::map<std::string, PointCloud>& clouds, const SweepGrid& grid,
                                     const EstimatorOptions& opts = {}, std::size_t threads = 0) {
    if (clouds.empty() || grid.m_values.empty() || grid.n_values.empty() || grid.l_values.empty() ||
        grid.seeds.empty())
        throw ArgumentError("sensitivity sweep grid is empty");
    SweepResult result;
    for (const auto& [split, cloud] : clouds) {
        for (std::size_t m : grid.m_values)
            for (std::size_t n : grid.n_values)
                for (std::size_t l : grid.l_values)
                    for (std::uint64_t seed : grid.seeds) {
                        SweepRow row{split, m, n, l, seed, std::nullopt, 0, {}};
                        try {
                            const auto r = run_pipeline(cloud, SamplingConfig{m, n, l, seed}, opts, threads);
                            row.summary = r.summary;
                            row.n_sampled = r.sample.info.n_sampled;
                        } catch (const Error& e) {
                            row.error = e.what();
                        }
                        result.rows.push_back(std::move(row));
                    }
    }
    return result;
}

/// File-backed variant; a dump that fails to load fails every cell of its split.
inline SweepResult sensitivity_sweep(const std::map<std::string, std::filesystem::path>& dumps,
                                     const SweepGrid& grid, const EstimatorOptions& opts = {},
                                     std::size_t threads = 0) {
    if (dumps.empty()) throw ArgumentError("sensitivity sweep needs at least one dump");
    SweepResult result;
    for (const auto& [split, path] : dumps) {
        std::map<std::string, PointCloud> one;
        std::string load_error;
        try {
            one.emplace(split, load_point_cloud(path));
        } catch (const Error& e) {
            load_error = e.what();
        }
        if (!load_error.empty()) {
            for (std::size_t m : grid.m_values)
                for (std::size_t n : grid.n_values)
                    for (std::size_t l : grid.l_values)
                        for (std::uint64_t seed : grid.seeds)
                            result.rows.push_back(SweepRow{split, m, n, l, seed, std::nullopt, 0, load_error});
            continue;
        }
        auto part = sensitivity_sweep(one, grid, opts, threads);
        for (auto& r : part.rows) result.rows.push_back(std::move(r));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Layer profile

struct LayerRow {
    int layer = 0;
    EstimateSummary summary;
    std::size_t n_sampled = 0;
};

struct LayerProfile {
    std::vector<LayerRow> rows;                        // ascending by layer
    std::vector<std::pair<int, std::string>> missing;  // layers that could not be processed
};

inline LayerProfile layer_profile(const std::map<int, std::filesystem::path>& dumps, const SamplingConfig& config,
                                  const EstimatorOptions& opts = {}, std::size_t threads = 0) {
    LayerProfile out;
    for (const auto& [layer, path] : dumps) {
        try {
            const auto r = run_pipeline(load_point_cloud(path), config, opts, threads);
            out.rows.push_back(LayerRow{layer, r.summary, r.sample.info.n_sampled});
        } catch (const Error& e) {
            log::warn("layer " + std::to_string(layer) + " skipped: " + e.what());
            out.missing.emplace_back(layer, e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint tracking

struct CheckpointPoint {
    std::int64_t step = 0;
    EstimateSummary summary;
    MetricRow metrics;
};

struct TrackOptions {
    std::size_t window = 5;   // trailing window length for stabilization
    double tolerance = 0.02;  // relative range threshold

    void validate() const {
        if (window < 1) throw ArgumentError("stabilization window must be >= 1");
        if (!(tolerance >= 0.0)) throw ArgumentError("stabilization tolerance must be >= 0");
    }
};

struct CheckpointSeries {
    std::vector<CheckpointPoint> points;
    std::string split_label;
    std::int64_t min_step = 0;                    // step of the lowest mean estimate
    std::optional<std::int64_t> stabilized_step;  // first step closing a flat window
};

/// (max - min) / |mean| of a window; 0 for a constant window.
inline double relative_range(std::span<const double> w) {
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    if (*hi == *lo) return 0.0;
    const double m = std::abs(mean_of(w));
    return m == 0.0 ? INFINITY : (*hi - *lo) / m;
}

/// Aligns summaries with metrics and flags the minimum and the first step at
/// which the trailing window of mean estimates is flat. Steps must be
/// strictly increasing.
inline CheckpointSeries track_checkpoints(std::vector<std::pair<std::int64_t, EstimateSummary>> series,
                                          const std::map<std::int64_t, MetricRow>& metrics = {},
                                          const TrackOptions& opts = {}, std::string split_label = {}) {
    opts.validate();
    if (series.empty()) throw InputError("checkpoint series is empty");
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i].first <= series[i - 1].first)
            throw InputError("checkpoint steps must be strictly increasing (step " +
                             std::to_string(series[i].first) + " after " + std::to_string(series[i - 1].first) +
                             ")");
    }
    CheckpointSeries out;
    out.split_label = std::move(split_label);
    std::vector<double> means;
    for (auto& [step, summary] : series) {
        CheckpointPoint p{step, summary, {}};
        if (auto it = metrics.find(step); it != metrics.end()) p.metrics = it->second;
        out.points.push_back(std::move(p));
        means.push_back(summary.mean);
    }
    const auto min_it = std::min_element(means.begin(), means.end());
    out.min_step = out.points[static_cast<std::size_t>(min_it - means.begin())].step;
    for (std::size_t t = opts.window - 1; t < means.size(); ++t) {
        const std::span<const double> w(means.data() + t + 1 - opts.window, opts.window);
        if (relative_range(w) < opts.tolerance) {
            out.stabilized_step = out.points[t].step;
            break;
        }
    }
    return out;
}

/// File-backed variant: each checkpoint is a `row,estimate` CSV.
inline CheckpointSeries track_checkpoints(const std::vector<std::pair<std::int64_t, std::filesystem::path>>& files,
                                          const std::optional<std::filesystem::path>& metrics_file,
                                          const TrackOptions& opts = {}, std::string split_label = {}) {
    std::vector<std::pair<std::int64_t, EstimateSummary>> series;
    for (const auto& [step, path] : files) {
        const auto values = read_estimates_csv(path);
        if (values.empty()) throw InputError(path.string() + ": no estimates");
        series.emplace_back(step, summarize(values));
    }
    std::map<std::int64_t, MetricRow> metrics;
    if (metrics_file) metrics = read_metrics_csv(*metrics_file);
    return track_checkpoints(std::move(series), metrics, opts, std::move(split_label));
}

}  // namespace lidscope
