#pragma once

// End-to-end local estimation: sequence subsample -> de-duplicate ->
// token subsample -> L-NN -> local TwoNN -> summary.

#include <cstddef>
#include <cstdint>

#include "lidscope/log.hpp"
#include "lidscope/point_cloud.hpp"
#include "lidscope/random.hpp"
#include "lidscope/summary.hpp"
#include "lidscope/twonn.hpp"

namespace lidscope {

/// Stream index used to derive the sequence-selection seed from the run
/// seed; the token subsample uses the run seed itself.
inline constexpr std::uint64_t kSequenceStream = 1;

struct SampleInfo {
    std::size_t n_input = 0;
    std::size_t n_after_sequences = 0;
    std::size_t n_after_dedup = 0;
    std::size_t n_sampled = 0;
    bool sequences_applied = false;  // false when M covers every sequence or no metadata
    bool saturated = false;          // N >= points available, whole cloud used
};

struct PreparedSample {
    PointCloud cloud;
    SampleInfo info;
};

/// Token set the estimates are computed on.
inline PreparedSample prepare_sample(const PointCloud& input, const SamplingConfig& config) {
    config.validate();
    PreparedSample out;
    out.info.n_input = input.n_points();
    PointCloud selected = input;
    if (config.m_sequences != SamplingConfig::kAllSequences) {
        if (input.has_meta()) {
            selected = select_sequences(input, config.m_sequences, derive_seed(config.seed, kSequenceStream));
            out.info.sequences_applied = selected.n_points() != input.n_points();
        } else {
            log::warn("sequence sample size M ignored: the dump carries no token metadata");
        }
    }
    out.info.n_after_sequences = selected.n_points();
    PointCloud unique = deduplicate(selected);
    out.info.n_after_dedup = unique.n_points();
    out.info.saturated = config.n_tokens >= unique.n_points();
    out.cloud = subsample_tokens(unique, config.n_tokens, config.seed);
    out.info.n_sampled = out.cloud.n_points();
    return out;
}

struct PipelineResult {
    PreparedSample sample;
    LocalEstimates estimates;
    EstimateSummary summary;
};

inline PipelineResult run_pipeline(const PointCloud& input, const SamplingConfig& config,
                                   const EstimatorOptions& opts = {}, std::size_t threads = 0) {
    PipelineResult r;
    r.sample = prepare_sample(input, config);
    r.estimates = local_twonn(r.sample.cloud, config, opts, threads);
    r.summary = summarize(r.estimates.values);
    return r;
}

}  // namespace lidscope
