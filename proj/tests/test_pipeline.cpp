#include <gtest/gtest.h>

#include <set>

#include "lidscope/pipeline.hpp"
#include "lidscope/synthetic.hpp"
#include "test_support.hpp"

using namespace lidscope;
using lidscope::test::WarningCapture;

namespace {

/// Cloud of `n_seq` sequences with `len` tokens each, one row per token.
PointCloud with_sequences(std::size_t n_seq, std::size_t len, std::size_t dim, std::uint64_t seed) {
    const auto m = synthetic::gaussian(n_seq * len, dim, seed);
    std::vector<TokenMeta> meta(n_seq * len);
    for (std::size_t i = 0; i < meta.size(); ++i) {
        meta[i].seq_id = static_cast<std::int64_t>(i / len);
        meta[i].pos = static_cast<std::int64_t>(i % len);
    }
    const auto c = synthetic::to_cloud(m);
    return PointCloud(c.n_points(), c.dim(), {c.data().begin(), c.data().end()}, meta, c.precision());
}

SamplingConfig cfg(std::size_t m, std::size_t n, std::size_t l, std::uint64_t seed) {
    return SamplingConfig{m, n, l, seed};
}

}  // namespace

TEST(Pipeline, DefaultsMatchDocumentedValues) {
    const SamplingConfig c;
    EXPECT_EQ(c.n_tokens, 60000u);
    EXPECT_EQ(c.n_neighbors, 128u);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.m_sequences, SamplingConfig::kAllSequences);
    const EstimatorOptions e;
    EXPECT_EQ(e.estimator, Estimator::linfit);
    EXPECT_DOUBLE_EQ(e.discard_fraction, 0.1);
}

TEST(Pipeline, SequenceSelectionThenDedupThenSubsample) {
    auto base = with_sequences(50, 20, 4, 1);
    const auto s = prepare_sample(base, cfg(10, 150, 16, 7));
    EXPECT_TRUE(s.info.sequences_applied);
    EXPECT_EQ(s.info.n_input, 1000u);
    EXPECT_EQ(s.info.n_after_sequences, 200u);
    EXPECT_EQ(s.info.n_after_dedup, 200u);
    EXPECT_EQ(s.info.n_sampled, 150u);
    EXPECT_FALSE(s.info.saturated);
    std::set<std::int64_t> seqs;
    for (const auto& t : *s.cloud.meta()) seqs.insert(t.seq_id);
    EXPECT_LE(seqs.size(), 10u);
}

TEST(Pipeline, SaturationIsReported) {
    const auto c = synthetic::rotated_cube(100, 2, 5, 2);
    const auto s = prepare_sample(c, cfg(SamplingConfig::kAllSequences, 500, 16, 1));
    EXPECT_TRUE(s.info.saturated);
    EXPECT_EQ(s.cloud, c);
}

TEST(Pipeline, DuplicatesRemovedBeforeSampling) {
    const auto c = synthetic::rotated_cube(100, 2, 5, 2);
    auto m = synthetic::from_cloud(c);
    synthetic::Matrix doubled(200, 5);
    doubled << m, m;
    const auto s = prepare_sample(synthetic::to_cloud(doubled), cfg(SamplingConfig::kAllSequences, 100, 16, 1));
    EXPECT_EQ(s.info.n_after_dedup, 100u);
    EXPECT_TRUE(s.info.saturated);
    const auto r = run_pipeline(synthetic::to_cloud(doubled), cfg(SamplingConfig::kAllSequences, 150, 16, 1));
    EXPECT_EQ(r.estimates.n_zero_distance, 0u);
}

TEST(Pipeline, SequenceSizeWithoutMetadataWarns) {
    WarningCapture w;
    const auto s = prepare_sample(synthetic::rotated_cube(100, 2, 5, 2), cfg(3, 50, 16, 1));
    EXPECT_FALSE(s.info.sequences_applied);
    EXPECT_EQ(s.info.n_sampled, 50u);
    EXPECT_EQ(w.messages.size(), 1u);
}

TEST(Pipeline, SameSeedSameEstimates) {
    const auto c = synthetic::rotated_cube(2000, 3, 12, 3);
    const auto a = run_pipeline(c, cfg(SamplingConfig::kAllSequences, 800, 32, 5));
    const auto b = run_pipeline(c, cfg(SamplingConfig::kAllSequences, 800, 32, 5));
    EXPECT_EQ(a.estimates.values, b.estimates.values);
    EXPECT_EQ(a.summary, b.summary);
    const auto other = run_pipeline(c, cfg(SamplingConfig::kAllSequences, 800, 32, 6));
    EXPECT_NE(a.estimates.values, other.estimates.values);
}

TEST(Pipeline, EstimatesAreNearIntrinsicDimension) {
    const auto c = synthetic::rotated_cube(3000, 2, 32, 11);
    const auto r = run_pipeline(c, cfg(SamplingConfig::kAllSequences, 3000, 64, 1));
    EXPECT_NEAR(r.summary.mean, 2.0, 0.15);
    EXPECT_EQ(r.summary.count, 3000u);
}

TEST(Pipeline, InvalidConfigRejected) {
    const auto c = synthetic::rotated_cube(100, 2, 5, 2);
    EXPECT_THROW(prepare_sample(c, cfg(SamplingConfig::kAllSequences, 0, 16, 1)), ArgumentError);
    EXPECT_THROW(run_pipeline(c, cfg(SamplingConfig::kAllSequences, 50, 64, 1)), ArgumentError);
}
