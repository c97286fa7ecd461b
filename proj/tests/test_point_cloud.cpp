#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_set>

#include "lidscope/point_cloud.hpp"
#include "lidscope/random.hpp"
#include "lidscope/synthetic.hpp"

using namespace lidscope;

namespace {

PointCloud make(std::size_t n, std::size_t d, std::vector<double> v) { return PointCloud(n, d, std::move(v)); }

std::string row_key(const PointCloud& c, std::size_t r) {
    std::string k(c.dim() * sizeof(double), '\0');
    std::memcpy(k.data(), c.row(r).data(), k.size());
    return k;
}

}  // namespace

TEST(PointCloud, RejectsNonFiniteValues) {
    EXPECT_THROW(make(2, 1, {0.0, std::nan("")}), DataError);
    EXPECT_THROW(make(1, 2, {std::numeric_limits<double>::infinity(), 0.0}), DataError);
}

TEST(PointCloud, RejectsShapeAndMetadataMismatch) {
    EXPECT_THROW(make(2, 2, {1, 2, 3}), ArgumentError);
    EXPECT_THROW(PointCloud(1, 0, {}), ArgumentError);
    EXPECT_THROW(PointCloud(2, 1, {1, 2}, std::vector<TokenMeta>(3)), MetadataError);
    TokenMeta bad;
    bad.seq_id = -1;
    EXPECT_THROW(PointCloud(1, 1, {1}, std::vector<TokenMeta>{bad}), MetadataError);
}

TEST(Deduplicate, DropsLaterCopiesOfARow) {
    const auto out = deduplicate(make(3, 2, {1, 2, 1, 2, 3, 4}));
    EXPECT_EQ(out, make(2, 2, {1, 2, 3, 4}));
}

TEST(Deduplicate, LeavesDistinctCloudUntouched) {
    const auto c = synthetic::to_cloud(synthetic::gaussian(100, 3, 1));
    EXPECT_EQ(deduplicate(c), c);
}

TEST(Deduplicate, UsesBitwiseEquality) {
    // 0.0 and -0.0 compare equal as numbers but differ bitwise.
    const auto out = deduplicate(make(2, 1, {0.0, -0.0}));
    EXPECT_EQ(out.n_points(), 2u);
}

TEST(Deduplicate, InjectedCopiesMatchHashSetCount) {
    auto base = synthetic::gaussian(5000, 8, 7);
    synthetic::Matrix with_copies(5037, 8);
    with_copies.topRows(5000) = base;
    CounterRng rng(11);
    for (int i = 0; i < 37; ++i) with_copies.row(5000 + i) = base.row(static_cast<Eigen::Index>(uniform_below(rng, 5000)));
    const auto cloud = synthetic::to_cloud(with_copies);

    std::unordered_set<std::string> oracle;
    for (std::size_t r = 0; r < cloud.n_points(); ++r) oracle.insert(row_key(cloud, r));
    ASSERT_EQ(oracle.size(), 5000u);

    const auto out = deduplicate(cloud);
    EXPECT_EQ(out.n_points(), oracle.size());
    EXPECT_EQ(deduplicate(out), out);  // idempotent
    // First occurrences in original order.
    for (std::size_t r = 0; r < 5000; ++r) ASSERT_EQ(row_key(out, r), row_key(cloud, r));
}

TEST(Deduplicate, MetadataFollowsRows) {
    std::vector<TokenMeta> meta(3);
    for (int i = 0; i < 3; ++i) meta[i].pos = i;
    const auto out = deduplicate(PointCloud(3, 1, {5, 5, 6}, meta));
    ASSERT_TRUE(out.has_meta());
    EXPECT_EQ((*out.meta())[0].pos, 0);
    EXPECT_EQ((*out.meta())[1].pos, 2);
}

TEST(SubsampleTokens, SaturatedRequestReturnsInput) {
    const auto c = synthetic::to_cloud(synthetic::gaussian(50, 2, 3));
    EXPECT_EQ(subsample_tokens(c, 50, 1), c);
    EXPECT_EQ(subsample_tokens(c, 1000, 1), c);
}

TEST(SubsampleTokens, ZeroIsAnError) {
    const auto c = synthetic::to_cloud(synthetic::gaussian(5, 2, 3));
    EXPECT_THROW(subsample_tokens(c, 0, 1), ArgumentError);
}

TEST(SubsampleTokens, SeedDeterminesSelection) {
    const auto c = synthetic::to_cloud(synthetic::gaussian(10000, 2, 3));
    const auto a = subsample_tokens(c, 500, 99);
    EXPECT_EQ(a, subsample_tokens(c, 500, 99));
    EXPECT_NE(a, subsample_tokens(c, 500, 100));
}

TEST(SubsampleTokens, DrawsWithoutReplacementFromInputRows) {
    const auto c = synthetic::to_cloud(synthetic::gaussian(100000, 1, 5));
    const auto s = subsample_tokens(c, 60000, 4);
    EXPECT_EQ(s.n_points(), 60000u);
    std::set<double> input(c.data().begin(), c.data().end());
    std::set<double> seen;
    for (double v : s.data()) {
        EXPECT_TRUE(input.count(v));
        EXPECT_TRUE(seen.insert(v).second);
    }
}

TEST(SubsampleTokens, SmallerSampleIsPrefixOfLarger) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto small = shuffled_prefix(1000, 100, seed);
        const auto large = shuffled_prefix(1000, 700, seed);
        EXPECT_TRUE(std::equal(small.begin(), small.end(), large.begin()));
    }
}

TEST(SelectSequences, KeepsWholeSequences) {
    std::vector<TokenMeta> meta;
    std::vector<double> v;
    for (int s = 0; s < 10; ++s)
        for (int p = 0; p < 4; ++p) {
            TokenMeta t;
            t.seq_id = s;
            t.pos = p;
            meta.push_back(t);
            v.push_back(s * 10 + p);
        }
    const PointCloud c(40, 1, v, meta);
    const auto out = select_sequences(c, 3, 8);
    EXPECT_EQ(out.n_points(), 12u);
    std::map<std::int64_t, int> per_seq;
    for (const auto& t : *out.meta()) ++per_seq[t.seq_id];
    EXPECT_EQ(per_seq.size(), 3u);
    for (auto& [id, count] : per_seq) EXPECT_EQ(count, 4);
    EXPECT_EQ(select_sequences(c, 10, 8), c);
    EXPECT_THROW(select_sequences(c.without_meta(), 3, 8), MetadataError);
}
