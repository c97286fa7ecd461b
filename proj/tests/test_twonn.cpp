#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lidscope/oracles.hpp"
#include "lidscope/synthetic.hpp"
#include "lidscope/twonn.hpp"
#include "test_support.hpp"

using namespace lidscope;
using lidscope::test::WarningCapture;

namespace {

/// Flat 2-torus in R^4, uniform in its angles.
PointCloud flat_torus(std::size_t n, std::uint64_t seed) {
    const auto angles = synthetic::uniform_cube(n, 2, seed);
    std::vector<double> v;
    v.reserve(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * angles(static_cast<Eigen::Index>(i), 0);
        const double b = 2.0 * std::numbers::pi * angles(static_cast<Eigen::Index>(i), 1);
        v.insert(v.end(), {std::cos(a), std::sin(a), std::cos(b), std::sin(b)});
    }
    return PointCloud(n, 4, std::move(v), std::nullopt, Precision::float64);
}

/// Kolmogorov-Smirnov statistic of a sample against 1 - mu^-shape.
double ks_pareto(std::vector<double> mus, double shape) {
    std::sort(mus.begin(), mus.end());
    const double n = static_cast<double>(mus.size());
    double d = 0.0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        const double f = 1.0 - std::pow(mus[i], -shape);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

SamplingConfig with_l(std::size_t L) {
    SamplingConfig c;
    c.n_neighbors = L;
    return c;
}

}  // namespace

TEST(TwoNNRatios, MatchDirectDefinition) {
    CounterRng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + uniform_below(rng, 400);
        const auto c = synthetic::to_cloud(synthetic::gaussian(n, 1 + uniform_below(rng, 30), rng()));
        auto got = twonn_ratios(c).mus;
        auto want = oracles::twonn_ratios_direct(c);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            EXPECT_NEAR(got[i], static_cast<double>(want[i]), 1e-9 * static_cast<double>(want[i]));
    }
}

TEST(TwoNNRatios, ZeroDistancePointsAreDroppedWithWarning) {
    WarningCapture w;
    const PointCloud c(5, 1, {0, 0, 1, 3, 7});
    const auto s = twonn_ratios(c);
    EXPECT_EQ(s.n_dropped, 2u);
    EXPECT_EQ(s.n_used, 3u);
    EXPECT_FALSE(w.messages.empty());
}

TEST(TwoNNRatios, TooFewPointsIsArgumentError) {
    EXPECT_THROW(twonn_ratios(PointCloud(2, 1, {0, 1})), ArgumentError);
}

TEST(LinearFit, MatchesLeastSquaresOracle) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto c = synthetic::to_cloud(synthetic::uniform_cube(800, 3, seed));
        const auto s = twonn_ratios(c);
        for (double discard : {0.0, 0.1, 0.25}) {
            std::vector<long double> mus(s.mus.begin(), s.mus.end());
            const auto want = oracles::linfit_direct(mus, linfit_kept(mus.size(), discard));
            EXPECT_NEAR(fit_dimension_linfit(s, discard), static_cast<double>(want), 1e-10 * static_cast<double>(want));
        }
    }
}

TEST(LinearFit, KeptCountDropsTailAndLastPoint) {
    EXPECT_EQ(linfit_kept(100, 0.1), 90u);
    EXPECT_EQ(linfit_kept(100, 0.0), 99u);
    EXPECT_EQ(linfit_kept(10, 0.1), 9u);
    EXPECT_EQ(linfit_kept(30, 0.1), 27u);
    EXPECT_EQ(linfit_kept(128, 0.1), 115u);
}

TEST(LinearFit, AllUnitRatiosAreDegenerate) {
    RatioSample s;
    s.mus.assign(20, 1.0);
    s.n_used = 20;
    EXPECT_THROW(fit_dimension_linfit(s, 0.1), DegenerateError);
    EXPECT_THROW(fit_dimension_mle(s), DegenerateError);
}

TEST(Mle, EqualsClosedForm) {
    const auto s = synthetic::pareto_ratios(1000, 4.0, 3);
    long double sum = 0.0L;
    for (double mu : s.mus) sum += std::log(static_cast<long double>(mu));
    EXPECT_NEAR(fit_dimension_mle(s), static_cast<double>(1000.0L / sum), 1e-10);
}

TEST(Estimators, RecoverParetoShape) {
    for (double d : {1.0, 3.0, 5.0, 8.0}) {
        const auto s = synthetic::pareto_ratios(100000, d, 20 + static_cast<std::uint64_t>(d));
        EXPECT_NEAR(fit_dimension_linfit(s, 0.1), d, 0.03 * d);
        EXPECT_NEAR(fit_dimension_mle(s), d, 0.03 * d);
    }
}

TEST(Estimators, RatiosOnUnitSquareFollowParetoTwo) {
    // KS test at the 1% level on most seeds.
    int accepted = 0;
    const std::size_t n = 1500;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = twonn_ratios(synthetic::to_cloud(synthetic::uniform_cube(n, 2, 300 + seed)));
        if (ks_pareto(s.mus, 2.0) < 1.628 / std::sqrt(static_cast<double>(s.mus.size()))) ++accepted;
    }
    EXPECT_GE(accepted, 3);
}

TEST(Estimators, CubeDimensionRecovered) {
    for (std::size_t d : {1u, 2u, 4u}) {
        const auto c = synthetic::rotated_cube(4000, d, 3 * d + 2, 50 + d);
        const double est = twonn_global(c);
        EXPECT_NEAR(est, static_cast<double>(d), 0.1 * static_cast<double>(d)) << "d=" << d;
    }
}

TEST(Estimators, OptionsAreValidated) {
    const auto c = synthetic::to_cloud(synthetic::gaussian(50, 3, 1));
    EXPECT_THROW(twonn_global(c, EstimatorOptions{Estimator::linfit, 1.0, true}), ArgumentError);
    EXPECT_THROW(twonn_global(c, EstimatorOptions{Estimator::linfit, -0.1, true}), ArgumentError);
    EXPECT_EQ(parse_estimator("mle"), Estimator::mle);
    EXPECT_THROW(parse_estimator("pca"), ArgumentError);
}

TEST(LocalTwoNN, SaturatedNeighborhoodEqualsGlobal) {
    for (auto est : {Estimator::linfit, Estimator::mle}) {
        const auto c = synthetic::rotated_cube(100, 4, 12, 3);
        const EstimatorOptions o{est, 0.1, true};
        const auto local = local_twonn(c, with_l(100), o);
        const double global = twonn_global(c, o);
        for (double v : local.values) EXPECT_NEAR(v, global, 1e-9 * global);
    }
}

TEST(LocalTwoNN, ThreadCountIsBitIdentical) {
    const auto c = synthetic::rotated_cube(3000, 3, 10, 4);
    const auto one = local_twonn(c, with_l(40), {}, 1);
    for (std::size_t t : {2u, 5u, 8u}) EXPECT_EQ(one.values, local_twonn(c, with_l(40), {}, t).values);
}

TEST(LocalTwoNN, RegularSimplexIsDegenerate) {
    // Every pair of standard basis vectors is sqrt(2) apart, so every ratio is 1.
    const std::size_t n = 8;
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    WarningCapture w;
    const auto r = local_twonn(PointCloud(n, n, v), with_l(n));
    EXPECT_EQ(r.n_degenerate, n);
    for (double x : r.values) EXPECT_EQ(x, 0.0);
    EXPECT_EQ(w.messages.size(), n);
}

TEST(LocalTwoNN, NeighborhoodSizeIsValidated) {
    const auto c = synthetic::to_cloud(synthetic::gaussian(20, 2, 1));
    EXPECT_THROW(local_twonn(c, with_l(2)), ArgumentError);
    EXPECT_THROW(local_twonn(c, with_l(21)), ArgumentError);
    EXPECT_NO_THROW(local_twonn(c, with_l(20)));
    // Linear fit on 4 ratios with a 0.5 discard keeps only two ratios.
    EXPECT_THROW(local_twonn(c, with_l(4), EstimatorOptions{Estimator::linfit, 0.5, true}), ArgumentError);
    EXPECT_NO_THROW(local_twonn(c, with_l(4), EstimatorOptions{Estimator::mle, 0.5, true}));
}

TEST(LocalTwoNN, InvariantUnderSimilarityTransforms) {
    auto base = synthetic::embed(synthetic::uniform_cube(600, 3, 8), 9, 9);
    const auto ref = local_twonn(synthetic::to_cloud(base), with_l(24)).values;
    const auto rot = synthetic::random_orthogonal(9, 10);
    synthetic::Matrix moved = (base * 250.0) * rot;
    moved.rowwise() += Eigen::RowVectorXd::Constant(9, -3.5);
    const auto got = local_twonn(synthetic::to_cloud(moved), with_l(24)).values;
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(got[i], ref[i], 1e-6 * ref[i]);
}

TEST(LocalTwoNN, FlatTorusEstimatesStayNearTwoAcrossScales) {
    const auto c = flat_torus(5000, 12);
    for (std::size_t L : {16u, 32u, 64u, 128u, 256u}) {
        const auto s = summarize(local_twonn(c, with_l(L)));
        EXPECT_NEAR(s.mean, 2.0, 0.2) << "L=" << L;
        EXPECT_NEAR(s.median, 2.0, 0.2) << "L=" << L;
    }
}

TEST(LocalTwoNN, MixtureSeparatesByManifold) {
    const auto mix = synthetic::disk_and_ball(800, 10, 41);
    const auto r = local_twonn(mix.cloud, with_l(48));
    double sum[2] = {0, 0};
    for (std::size_t i = 0; i < r.values.size(); ++i) sum[mix.label[i]] += r.values[i];
    EXPECT_NEAR(sum[0] / 800.0, 2.0, 0.6);
    EXPECT_NEAR(sum[1] / 800.0, 5.0, 0.9);
}
