#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lidscope/error.hpp"
#include "lidscope/parallel.hpp"
#include "lidscope/point_cloud.hpp"

namespace lidscope {

/// Squared Euclidean distance, accumulated in double over four interleaved
/// lanes in a fixed order. (a_i - b_i)^2 == (b_i - a_i)^2 exactly, so the
/// result is bitwise symmetric in its arguments.
inline double squared_distance(const double* a, const double* b, std::size_t dim) noexcept {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; i < dim; ++i) {
        const double d = a[i] - b[i];
        s0 += d * d;
    }
    return (s0 + s1) + (s2 + s3);
}

inline double pairwise_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ArgumentError("distance between vectors of dimension " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()));
    return std::sqrt(squared_distance(a.data(), b.data(), a.size()));
}

/// L nearest neighbors of every query row, ascending by (distance, index).
struct NeighborGraph {
    std::size_t n_queries = 0;
    std::size_t k = 0;
    std::vector<std::size_t> indices;  // n_queries x k
    std::vector<double> distances;     // n_queries x k

    std::span<const std::size_t> neighbors(std::size_t q) const noexcept {
        return {indices.data() + q * k, k};
    }
    std::span<const double> neighbor_distances(std::size_t q) const noexcept {
        return {distances.data() + q * k, k};
    }

    bool operator==(const NeighborGraph&) const = default;
};

namespace detail {

struct Candidate {
    double dist;
    std::size_t index;
    friend bool operator<(const Candidate& a, const Candidate& b) noexcept {
        return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
    }
};

/// Bounded max-heap holding the k best candidates seen so far.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

    void offer(double dist, std::size_t index) {
        const Candidate c{dist, index};
        if (heap_.size() < k_) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (c < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    std::vector<Candidate>& sorted() {
        std::sort_heap(heap_.begin(), heap_.end());
        return heap_;
    }

    void reset() { heap_.clear(); }

private:
    std::size_t k_;
    std::vector<Candidate> heap_;
};

inline constexpr std::size_t kQueryBlock = 16;
inline constexpr std::size_t kReferenceBlock = 256;

/// Blocked brute-force search of `queries` against `reference`. Candidates
/// are ranked by squared distance, the root is taken once per kept
/// neighbor. When exclude_self is set, query q never matches reference row q.
inline NeighborGraph brute_force_search(const PointCloud& queries, const PointCloud& reference,
                                        std::size_t k, bool exclude_self, std::size_t threads) {
    NeighborGraph g;
    g.n_queries = queries.n_points();
    g.k = k;
    g.indices.resize(g.n_queries * k);
    g.distances.resize(g.n_queries * k);
    const std::size_t dim = queries.dim();
    const double* qdata = queries.data().data();
    const double* rdata = reference.data().data();
    const std::size_t n_ref = reference.n_points();

    const std::size_t n_blocks = (g.n_queries + kQueryBlock - 1) / kQueryBlock;
    parallel_for(n_blocks, resolve_threads(threads), [&](std::size_t b0, std::size_t b1) {
        std::vector<TopK> heaps(kQueryBlock, TopK(k));
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t q0 = b * kQueryBlock;
            const std::size_t q1 = std::min(g.n_queries, q0 + kQueryBlock);
            for (auto& h : heaps) h.reset();
            for (std::size_t r0 = 0; r0 < n_ref; r0 += kReferenceBlock) {
                const std::size_t r1 = std::min(n_ref, r0 + kReferenceBlock);
                for (std::size_t q = q0; q < q1; ++q) {
                    const double* qp = qdata + q * dim;
                    auto& heap = heaps[q - q0];
                    for (std::size_t r = r0; r < r1; ++r) {
                        if (exclude_self && r == q) continue;
                        heap.offer(squared_distance(qp, rdata + r * dim, dim), r);
                    }
                }
            }
            for (std::size_t q = q0; q < q1; ++q) {
                const auto& best = heaps[q - q0].sorted();
                for (std::size_t j = 0; j < k; ++j) {
                    g.indices[q * k + j] = best[j].index;
                    g.distances[q * k + j] = std::sqrt(best[j].dist);
                }
            }
        }
    });
    return g;
}

}  // namespace detail

/// Exact L-nearest-neighbor graph of a cloud, O(d N^2). Ties are broken by
/// ascending row index; the output does not depend on the thread count.
inline NeighborGraph knn_exact(const PointCloud& cloud, std::size_t L, bool include_self,
                               std::size_t threads = 0) {
    if (L == 0) throw ArgumentError("neighbor count must be >= 1");
    const std::size_t available = include_self ? cloud.n_points() : cloud.n_points() - std::min<std::size_t>(1, cloud.n_points());
    if (L > available)
        throw ArgumentError("requested " + std::to_string(L) + " neighbors but only " +
                            std::to_string(available) + " candidates per point");
    return detail::brute_force_search(cloud, cloud, L, !include_self, threads);
}

/// Nearest neighbors of each query row among the rows of `reference`.
inline NeighborGraph knn_cross(const PointCloud& queries, const PointCloud& reference, std::size_t k,
                               std::size_t threads = 0) {
    if (queries.dim() != reference.dim()) throw ArgumentError("query and reference dimensions differ");
    if (k == 0 || k > reference.n_points()) throw ArgumentError("neighbor count out of range");
    return detail::brute_force_search(queries, reference, k, false, threads);
}

/// Debug dump, one line per (query, rank).
inline void write_neighbor_csv(std::ostream& out, const NeighborGraph& g) {
    out << "query,rank,neighbor,distance\n";
    out.precision(17);
    for (std::size_t q = 0; q < g.n_queries; ++q) {
        for (std::size_t j = 0; j < g.k; ++j)
            out << q << ',' << j << ',' << g.indices[q * g.k + j] << ',' << g.distances[q * g.k + j] << '\n';
    }
}

}  // namespace lidscope
