#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lidscope/error.hpp"
#include "lidscope/random.hpp"

namespace lidscope {

enum class EmbeddingMode { regular, masked };

inline std::string_view to_string(EmbeddingMode m) noexcept {
    return m == EmbeddingMode::masked ? "masked" : "regular";
}

inline EmbeddingMode parse_embedding_mode(std::string_view s) {
    if (s == "regular") return EmbeddingMode::regular;
    if (s == "masked") return EmbeddingMode::masked;
    throw MetadataError("unknown embedding mode '" + std::string(s) + "'");
}

/// Provenance of one embedded token.
struct TokenMeta {
    std::int64_t seq_id = 0;
    std::int64_t pos = 0;
    std::string token_text;
    std::int32_t layer = -1;  // negative counts from the last layer
    EmbeddingMode mode = EmbeddingMode::regular;

    bool operator==(const TokenMeta&) const = default;
};

/// On-disk payload precision; in memory values are always held as double.
enum class Precision : std::uint8_t { float32, float64 };

/// N x d matrix of finite embedding vectors with optional per-row metadata.
///
/// Immutable after construction, so a cloud may be shared freely between
/// threads. The constructor enforces every invariant; a PointCloud that
/// exists is valid.
class PointCloud {
public:
    PointCloud() = default;

    PointCloud(std::size_t n_points, std::size_t dim, std::vector<double> data,
               std::optional<std::vector<TokenMeta>> meta = std::nullopt,
               Precision precision = Precision::float32)
        : n_points_(n_points), dim_(dim), data_(std::move(data)), meta_(std::move(meta)),
          precision_(precision) {
        if (dim_ == 0) throw ArgumentError("point cloud dimension must be at least 1");
        if (data_.size() != n_points_ * dim_)
            throw ArgumentError("point cloud payload has " + std::to_string(data_.size()) +
                                " values, expected " + std::to_string(n_points_ * dim_));
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (!std::isfinite(data_[i]))
                throw DataError("non-finite value at row " + std::to_string(i / dim_) +
                                ", column " + std::to_string(i % dim_));
        }
        if (meta_ && meta_->size() != n_points_)
            throw MetadataError("metadata has " + std::to_string(meta_->size()) +
                                " rows for " + std::to_string(n_points_) + " points");
        for (const auto& m : meta_.value_or(std::vector<TokenMeta>{})) {
            if (m.seq_id < 0 || m.pos < 0)
                throw MetadataError("metadata seq_id and pos must be non-negative");
        }
    }

    std::size_t n_points() const noexcept { return n_points_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return n_points_ == 0; }
    Precision precision() const noexcept { return precision_; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * dim_, dim_};
    }

    bool has_meta() const noexcept { return meta_.has_value(); }
    const std::optional<std::vector<TokenMeta>>& meta() const noexcept { return meta_; }

    /// New cloud made of the given rows, in the given order.
    PointCloud take_rows(std::span<const std::size_t> rows) const {
        std::vector<double> out;
        out.reserve(rows.size() * dim_);
        std::optional<std::vector<TokenMeta>> out_meta;
        if (meta_) out_meta.emplace().reserve(rows.size());
        for (std::size_t r : rows) {
            if (r >= n_points_) throw ArgumentError("row index out of range");
            auto src = row(r);
            out.insert(out.end(), src.begin(), src.end());
            if (meta_) out_meta->push_back((*meta_)[r]);
        }
        return PointCloud(rows.size(), dim_, std::move(out), std::move(out_meta), precision_);
    }

    PointCloud with_precision(Precision p) const {
        PointCloud copy = *this;
        copy.precision_ = p;
        return copy;
    }

    PointCloud without_meta() const {
        PointCloud copy = *this;
        copy.meta_.reset();
        return copy;
    }

    bool operator==(const PointCloud& other) const {
        if (n_points_ != other.n_points_ || dim_ != other.dim_ || meta_ != other.meta_)
            return false;
        // Bitwise comparison so that -0.0 and 0.0 are told apart.
        return data_.size() == other.data_.size() &&
               (data_.empty() ||
                std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0);
    }

private:
    std::size_t n_points_ = 0;
    std::size_t dim_ = 1;
    std::vector<double> data_;
    std::optional<std::vector<TokenMeta>> meta_;
    Precision precision_ = Precision::float32;
};

/// Sampling parameters of the estimation pipeline.
struct SamplingConfig {
    static constexpr std::size_t kAllSequences = std::numeric_limits<std::size_t>::max();

    std::size_t m_sequences = kAllSequences;  // M
    std::size_t n_tokens = 60000;             // N
    std::size_t n_neighbors = 128;            // L
    std::uint64_t seed = 42;

    void validate() const {
        if (m_sequences == 0) throw ArgumentError("sequence sample size M must be >= 1");
        if (n_tokens == 0) throw ArgumentError("token sample size N must be >= 1");
        if (n_neighbors < 2) throw ArgumentError("neighborhood size L must be >= 2");
    }

    bool operator==(const SamplingConfig&) const = default;
};

namespace detail {

struct RowHash {
    const PointCloud* cloud;
    std::size_t operator()(std::size_t r) const noexcept {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (double v : cloud->row(r)) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            h = mix64(h ^ bits);
        }
        return static_cast<std::size_t>(h);
    }
};

struct RowEqual {
    const PointCloud* cloud;
    bool operator()(std::size_t a, std::size_t b) const noexcept {
        auto ra = cloud->row(a);
        auto rb = cloud->row(b);
        return std::memcmp(ra.data(), rb.data(), ra.size() * sizeof(double)) == 0;
    }
};

}  // namespace detail

/// Drops rows that are bitwise identical to an earlier row. The first
/// occurrence of each group is kept and relative order is preserved.
inline PointCloud deduplicate(const PointCloud& cloud) {
    std::unordered_set<std::size_t, detail::RowHash, detail::RowEqual> seen(
        cloud.n_points() * 2 + 1, detail::RowHash{&cloud}, detail::RowEqual{&cloud});
    std::vector<std::size_t> keep;
    keep.reserve(cloud.n_points());
    for (std::size_t r = 0; r < cloud.n_points(); ++r) {
        if (seen.insert(r).second) keep.push_back(r);
    }
    if (keep.size() == cloud.n_points()) return cloud;
    return cloud.take_rows(keep);
}

/// First n entries of a seeded Fisher-Yates shuffle of [0, size). Because
/// step i never depends on n, the result for a smaller n is a prefix of the
/// result for a larger n under the same seed.
inline std::vector<std::size_t> shuffled_prefix(std::size_t size, std::size_t n,
                                                std::uint64_t seed) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    n = std::min(n, size);
    CounterRng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

/// Uniform token subsample of size n without replacement.
/// Returns the input unchanged when n >= n_points.
inline PointCloud subsample_tokens(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ArgumentError("token subsample size must be >= 1");
    if (n >= cloud.n_points()) return cloud;
    const auto rows = shuffled_prefix(cloud.n_points(), n, seed);
    return cloud.take_rows(rows);
}

/// Keeps the tokens of M sequences drawn by shuffle-then-truncate over the
/// distinct seq_ids (in order of first appearance). Requires metadata.
inline PointCloud select_sequences(const PointCloud& cloud, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw ArgumentError("sequence sample size must be >= 1");
    if (!cloud.has_meta())
        throw MetadataError("sequence subsampling needs token metadata (seq_id)");
    const auto& meta = *cloud.meta();
    std::vector<std::int64_t> ids;
    std::unordered_map<std::int64_t, std::size_t> slot;
    for (const auto& t : meta) {
        if (slot.emplace(t.seq_id, ids.size()).second) ids.push_back(t.seq_id);
    }
    if (m >= ids.size()) return cloud;
    std::vector<char> chosen(ids.size(), 0);
    for (std::size_t k : shuffled_prefix(ids.size(), m, seed)) chosen[k] = 1;
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < meta.size(); ++r) {
        if (chosen[slot.at(meta[r].seq_id)]) rows.push_back(r);
    }
    return cloud.take_rows(rows);
}

}  // namespace lidscope
