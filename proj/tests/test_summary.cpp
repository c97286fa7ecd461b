#include <gtest/gtest.h>

#include <vector>

#include "lidscope/oracles.hpp"
#include "lidscope/random.hpp"
#include "lidscope/summary.hpp"

using namespace lidscope;

TEST(Summary, QuartilesUseLinearInterpolation) {
    const std::vector<double> v{4, 1, 3, 2};
    const auto s = summarize(v);
    EXPECT_EQ(s.count, 4u);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.q1, 1.75);
    EXPECT_DOUBLE_EQ(s.median, 2.5);
    EXPECT_DOUBLE_EQ(s.q3, 3.25);
}

TEST(Summary, StdUsesSampleDenominator) {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_NEAR(summarize(v).std, 2.1380899352993950, 1e-14);
}

TEST(Summary, SingleValue) {
    const std::vector<double> v{3.5};
    const auto s = summarize(v);
    EXPECT_EQ(s.std, 0.0);
    EXPECT_EQ(s.q1, 3.5);
    EXPECT_EQ(s.q3, 3.5);
}

TEST(Summary, EmptyInputThrows) { EXPECT_THROW(summarize(std::vector<double>{}), ArgumentError); }

TEST(Summary, AgreesWithDirectComputation) {
    CounterRng rng(2);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> v(1 + uniform_below(rng, 5000));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = 5.0 + 2.0 * standard_normal_at(rng, i);
        rng();
        const auto s = summarize(v);
        const auto o = oracles::direct_stats(v);
        EXPECT_NEAR(s.mean, static_cast<double>(o.mean), 1e-12);
        EXPECT_NEAR(s.std, static_cast<double>(o.std), 1e-10);
        EXPECT_NEAR(s.q1, static_cast<double>(o.q1), 1e-12);
        EXPECT_NEAR(s.median, static_cast<double>(o.median), 1e-12);
        EXPECT_NEAR(s.q3, static_cast<double>(o.q3), 1e-12);
    }
}
