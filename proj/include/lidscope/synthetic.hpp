#pragma once

// Synthetic point clouds with known intrinsic dimension, used by the
// self-test suite, the unit tests and the `synth` CLI command.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lidscope/error.hpp"
#include "lidscope/point_cloud.hpp"
#include "lidscope/random.hpp"
#include "lidscope/twonn.hpp"

namespace lidscope::synthetic {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Matrix uniform_cube(std::size_t n, std::size_t d, std::uint64_t seed) {
    CounterRng rng(seed);
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = to_unit_open(rng());
    return m;
}

inline Matrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
    const CounterRng rng(seed);
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = standard_normal_at(rng, i * d + j);
    return m;
}

/// Uniform samples from the d-dimensional ball of the given radius.
inline Matrix uniform_ball(std::size_t n, std::size_t d, std::uint64_t seed, double radius = 1.0) {
    Matrix m = gaussian(n, d, derive_seed(seed, 0));
    CounterRng radial(derive_seed(seed, 1));
    for (std::size_t i = 0; i < n; ++i) {
        const double r = radius * std::pow(to_unit_open(radial()), 1.0 / static_cast<double>(d));
        m.row(i) *= r / m.row(i).norm();
    }
    return m;
}

/// Haar-random orthogonal matrix (QR of a Gaussian matrix with sign fix).
inline Matrix random_orthogonal(std::size_t dim, std::uint64_t seed) {
    const Matrix g = gaussian(dim, dim, seed);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

/// Places n x d points isometrically into R^ambient with a random rotation.
inline Matrix embed(const Matrix& points, std::size_t ambient, std::uint64_t seed) {
    if (ambient < static_cast<std::size_t>(points.cols()))
        throw ArgumentError("ambient dimension smaller than intrinsic dimension");
    const Matrix q = random_orthogonal(ambient, seed);
    return points * q.topRows(points.cols());
}

inline PointCloud to_cloud(const Matrix& m, Precision precision = Precision::float64) {
    std::vector<double> data(m.data(), m.data() + m.size());
    return PointCloud(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                      std::move(data), std::nullopt, precision);
}

inline Matrix from_cloud(const PointCloud& c) {
    Matrix m(c.n_points(), c.dim());
    std::copy(c.data().begin(), c.data().end(), m.data());
    return m;
}

/// Uniform d-cube rotated into R^ambient.
inline PointCloud rotated_cube(std::size_t n, std::size_t d, std::size_t ambient, std::uint64_t seed) {
    return to_cloud(embed(uniform_cube(n, d, derive_seed(seed, 10)), ambient, derive_seed(seed, 11)));
}

/// Rescales every column to unit sample standard deviation.
inline Matrix standardize_columns(Matrix m) {
    const auto n = static_cast<double>(m.rows());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double mean = m.col(j).mean();
        const double var = (m.col(j).array() - mean).square().sum() / (n - 1.0);
        if (var > 0) m.col(j) /= std::sqrt(var);
    }
    return m;
}

/// Ratios drawn exactly from Pareto(shape): mu = U^(-1/shape).
inline RatioSample pareto_ratios(std::size_t n, double shape, std::uint64_t seed) {
    CounterRng rng(seed);
    RatioSample s;
    s.mus.resize(n);
    for (auto& mu : s.mus) mu = std::pow(to_unit_open(rng()), -1.0 / shape);
    s.n_used = n;
    return s;
}

struct TwoManifoldMixture {
    PointCloud cloud;
    std::vector<int> label;  // 0 = disk (2-D), 1 = ball (5-D)
};

/// Disjoint union of a 2-D disk and a 5-D ball in R^ambient, separated by a
/// large offset along the first axis.
inline TwoManifoldMixture disk_and_ball(std::size_t n_each, std::size_t ambient, std::uint64_t seed,
                                        double offset = 100.0) {
    Matrix disk = embed(uniform_ball(n_each, 2, derive_seed(seed, 1)), ambient, derive_seed(seed, 2));
    Matrix ball = embed(uniform_ball(n_each, 5, derive_seed(seed, 3)), ambient, derive_seed(seed, 4));
    ball.col(0).array() += offset;
    Matrix all(2 * n_each, ambient);
    all << disk, ball;
    TwoManifoldMixture mix{to_cloud(all), std::vector<int>(2 * n_each, 0)};
    std::fill(mix.label.begin() + static_cast<std::ptrdiff_t>(n_each), mix.label.end(), 1);
    return mix;
}

}  // namespace lidscope::synthetic
