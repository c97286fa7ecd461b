#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "lidscope/lide_io.hpp"
#include "lidscope/synthetic.hpp"
#include "test_support.hpp"

using namespace lidscope;
using lidscope::test::TempDir;

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& b) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

/// Cloud whose values survive float32 storage.
PointCloud float_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
    auto m = synthetic::gaussian(n, d, seed);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(m.data()[i]);
    return synthetic::to_cloud(m, Precision::float32);
}

}  // namespace

TEST(LideFormat, HeaderLayoutIsExact) {
    const PointCloud c(3, 2, {1, 2, 3, 4, 5, 6});
    const auto bytes = encode_lide(c);
    const std::vector<unsigned char> header{'L', 'I', 'D', 'E', 1, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0,
                                            2, 0, 0, 0, 0, 0, 0, 0};
    ASSERT_EQ(bytes.size(), 24u + 6u * 4u);
    EXPECT_TRUE(std::equal(header.begin(), header.end(), bytes.begin()));
    // 1.0f little-endian
    EXPECT_EQ(bytes[24], 0x00);
    EXPECT_EQ(bytes[27], 0x3F);
    EXPECT_EQ(bytes[26], 0x80);

    const auto f64 = encode_lide(c.with_precision(Precision::float64));
    EXPECT_EQ(f64[6], 1);
    EXPECT_EQ(f64.size(), 24u + 6u * 8u);
}

TEST(LideFormat, SmallCloudRoundTrips) {
    TempDir dir("io");
    const PointCloud c(3, 2, {0.5, 1, -2, 3.25, 4, 0});
    save_point_cloud(c, dir / "small.lide");
    const auto back = load_point_cloud(dir / "small.lide");
    EXPECT_EQ(back.n_points(), 3u);
    EXPECT_EQ(back.dim(), 2u);
    EXPECT_EQ(back, c);
}

TEST(LideFormat, BadMagicIsFormatError) {
    TempDir dir("io");
    auto bytes = encode_lide(PointCloud(1, 1, {1}));
    bytes[0] = 'X', bytes[1] = 'X', bytes[2] = 'X', bytes[3] = 'X';
    write_bytes(dir / "bad.lide", bytes);
    EXPECT_THROW(load_point_cloud(dir / "bad.lide"), FormatError);
}

TEST(LideFormat, VersionAndTruncationAreFormatErrors) {
    auto bytes = encode_lide(PointCloud(2, 2, {1, 2, 3, 4}));
    auto wrong_version = bytes;
    wrong_version[4] = 2;
    EXPECT_THROW(decode_lide(wrong_version), FormatError);
    auto truncated = bytes;
    truncated.pop_back();
    EXPECT_THROW(decode_lide(truncated), FormatError);
    EXPECT_THROW(decode_lide(std::vector<unsigned char>(10, 0)), FormatError);
}

TEST(LideFormat, NonFinitePayloadIsDataError) {
    auto bytes = encode_lide(PointCloud(1, 1, {1}));
    const float nan = std::nanf("");
    std::memcpy(bytes.data() + 24, &nan, 4);
    EXPECT_THROW(decode_lide(bytes), DataError);
}

TEST(LideFormat, EmptyCloudHasValidHeader) {
    TempDir dir("io");
    const PointCloud empty(0, 5, {});
    save_point_cloud(empty, dir / "empty.lide");
    EXPECT_EQ(read_bytes(dir / "empty.lide").size(), kLideHeaderSize);
    const auto back = load_point_cloud(dir / "empty.lide");
    EXPECT_EQ(back.n_points(), 0u);
    EXPECT_EQ(back.dim(), 5u);
}

TEST(LideFormat, MetadataSidecarIsWrittenAndRead) {
    TempDir dir("io");
    std::vector<TokenMeta> meta{{0, 1, "hello", -1, EmbeddingMode::regular},
                                {3, 0, "\"quoted\" tok", -12, EmbeddingMode::masked}};
    const PointCloud c(2, 1, {1, 2}, meta);
    save_point_cloud(c, dir / "m.lide");
    ASSERT_TRUE(std::filesystem::exists(dir / "m.meta.jsonl"));
    std::ifstream in(dir / "m.meta.jsonl");
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, R"({"seq_id":0,"pos":1,"token_text":"hello","layer":-1,"mode":"regular"})");
    EXPECT_EQ(load_point_cloud(dir / "m.lide"), c);
}

TEST(LideFormat, MetadataLengthMismatch) {
    TempDir dir("io");
    save_point_cloud(PointCloud(2, 1, {1, 2}, std::vector<TokenMeta>(2)), dir / "m.lide");
    save_point_cloud(PointCloud(3, 1, {1, 2, 3}), dir / "m.lide");  // sidecar now stale
    EXPECT_THROW(load_point_cloud(dir / "m.lide"), MetadataError);
    lidscope::test::WarningCapture warnings;
    const auto c = load_point_cloud(dir / "m.lide", LoadOptions{true});
    EXPECT_FALSE(c.has_meta());
    EXPECT_EQ(c.n_points(), 3u);
    EXPECT_EQ(warnings.messages.size(), 1u);
}

TEST(LideFormat, MissingFileIsIoError) { EXPECT_THROW(load_point_cloud("/nonexistent/x.lide"), IoError); }

TEST(LideFormat, RandomCloudsRoundTripBitExact) {
    // save -> load -> save yields the identical byte stream for either precision.
    TempDir dir("io");
    CounterRng rng(21);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = uniform_below(rng, 300);
        const std::size_t d = 1 + uniform_below(rng, 40);
        const bool f64 = trial % 2 == 1;
        const auto c = f64 ? synthetic::to_cloud(synthetic::gaussian(n, d, rng()), Precision::float64)
                           : float_cloud(n, d, rng());
        const auto p1 = dir / "a.lide";
        const auto p2 = dir / "b.lide";
        save_point_cloud(c, p1);
        const auto back = load_point_cloud(p1);
        EXPECT_EQ(back, c);
        save_point_cloud(back, p2);
        EXPECT_EQ(read_bytes(p1), read_bytes(p2));
    }
}

TEST(LideFormat, Random1000x64RoundTrip) {
    TempDir dir("io");
    const auto c = float_cloud(1000, 64, 5);
    save_point_cloud(c, dir / "r.lide");
    EXPECT_EQ(load_point_cloud(dir / "r.lide"), c);
}

TEST(LideFormat, LargeEmbeddingDumpResavesIdentically) {
    // 60000 x 768 float32, the size of a full-scale layer dump.
    TempDir dir("io");
    std::vector<double> data(60000ull * 768);
    CounterRng rng(77);
    for (auto& v : data) v = static_cast<float>(to_unit_open(rng()) * 4.0 - 2.0);
    save_point_cloud(PointCloud(60000, 768, std::move(data)), dir / "big.lide");
    const auto first = read_bytes(dir / "big.lide");
    save_point_cloud(load_point_cloud(dir / "big.lide"), dir / "big2.lide");
    EXPECT_EQ(first.size(), 24u + 60000u * 768u * 4u);
    EXPECT_TRUE(first == read_bytes(dir / "big2.lide"));
}
