#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rankwatch/rank_test.hpp"
#include "support.hpp"

using namespace rankwatch;

namespace {

CensoredSeries observed(std::vector<double> x) {
    return CensoredSeries::fully_observed(1, x);
}

}  // namespace

TEST(ScorePair, HandCases) {
    EXPECT_EQ(score_pair(5, true, 3, true), 1);
    EXPECT_EQ(score_pair(3, false, 3, false), 0);
    EXPECT_EQ(score_pair(2, false, 5, true), -1);
    EXPECT_EQ(score_pair(5, false, 3, true), 0);
    EXPECT_EQ(score_pair(2, true, 5, false), 0);
}

TEST(ScorePair, Antisymmetric) {
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> v(0, 4);
    std::bernoulli_distribution b(0.5);
    for (int i = 0; i < 20000; ++i) {
        const double xs = v(gen), xt = v(gen);
        const bool ds = b(gen), dt = b(gen);
        ASSERT_EQ(score_pair(xs, ds, xt, dt), -score_pair(xt, dt, xs, ds));
    }
}

TEST(Statistic, StepSeries) {
    const auto out = statistic(observed({1, 1, 5, 5}));
    EXPECT_EQ(out.scores, (std::vector<std::int64_t>{-2, -2, 2, 2}));
    ASSERT_EQ(out.s_path.size(), 4u);
    EXPECT_DOUBLE_EQ(out.s_path[0], -0.5);
    EXPECT_DOUBLE_EQ(out.s_path[1], -1.0);
    EXPECT_DOUBLE_EQ(out.s_path[2], -0.5);
    EXPECT_DOUBLE_EQ(out.s_path[3], 0.0);
    EXPECT_DOUBLE_EQ(out.w_stat, 1.0);
    EXPECT_EQ(out.change_bin, 2);
    EXPECT_FALSE(out.degenerate);
}

TEST(Statistic, ConstantSeriesIsDegenerate) {
    const auto out = statistic(observed({4, 4, 4, 4}));
    EXPECT_TRUE(out.degenerate);
    EXPECT_EQ(out.p_value, 1.0);
    EXPECT_EQ(out.w_stat, 0.0);
    EXPECT_EQ(out.change_bin, 1);
}

TEST(Statistic, AllCensoredIsDegenerate) {
    CensoredSeries s{1, {1, 2, 3}, {0, 0, 0}};
    EXPECT_TRUE(statistic(s).degenerate);
}

// (s - 1) smaller points behind, (P - s) larger ones ahead
TEST(Statistic, IncreasingSeriesScores) {
    for (int p = 2; p <= 30; ++p) {
        std::vector<double> x(p);
        for (int i = 0; i < p; ++i) x[i] = i * 1.5;
        const auto out = statistic(observed(x));
        for (int s = 1; s <= p; ++s) EXPECT_EQ(out.scores[s - 1], 2 * s - p - 1);
        const auto brute = testkit::brute_force(x, std::vector<std::uint8_t>(p, 1));
        EXPECT_EQ(out.w_stat, brute.w);
        EXPECT_EQ(out.change_bin, brute.t_hat);
    }
}

TEST(Statistic, TwoPoints) {
    const auto out = statistic_uncensored(std::vector<double>{1, 2});
    EXPECT_EQ(out.scores, (std::vector<std::int64_t>{-1, 1}));
    EXPECT_DOUBLE_EQ(out.s_path[0], -1.0 / std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(out.s_path[1], 0.0);
    EXPECT_DOUBLE_EQ(out.w_stat, 1.0 / std::sqrt(2.0));
}

TEST(Statistic, RejectsBadInput) {
    EXPECT_THROW(statistic(observed({1})), std::invalid_argument);
    CensoredSeries s{1, {1, 2, 3}, {1, 1}};
    EXPECT_THROW(statistic(s), std::invalid_argument);
}

TEST(Statistic, MatchesBruteForce) {
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<int> len(2, 20);
    for (int i = 0; i < 500; ++i) {
        const auto s = testkit::random_censored(gen, len(gen));
        const auto out = statistic(s);
        const auto brute = testkit::brute_force(s.x, s.observed);
        ASSERT_EQ(out.scores, brute.u);
        ASSERT_EQ(out.degenerate, brute.degenerate);
        if (brute.degenerate) continue;
        ASSERT_EQ(out.s_path, brute.s);
        ASSERT_EQ(out.w_stat, brute.w);
        ASSERT_EQ(out.change_bin, brute.t_hat);
    }
}

TEST(Statistic, ScoresSumToZero) {
    std::mt19937_64 gen(23);
    for (int i = 0; i < 300; ++i) {
        const auto out = statistic(testkit::random_censored(gen, 60));
        std::int64_t total = 0;
        for (auto u : out.scores) total += u;
        EXPECT_EQ(total, 0);
        EXPECT_NEAR(out.s_path.back(), 0.0, 1e-12);
    }
}

TEST(Statistic, UncensoredEqualsAllObserved) {
    std::mt19937_64 gen(29);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(60);
        for (auto& v : x) v = std::round(n01(gen) * 3);
        const auto a = statistic_uncensored(x);
        const auto b = statistic(CensoredSeries::fully_observed(0, x));
        EXPECT_EQ(a.scores, b.scores);
        EXPECT_EQ(a.w_stat, b.w_stat);
        EXPECT_EQ(a.p_value, b.p_value);
    }
}

TEST(Statistic, InvariantUnderMonotoneMaps) {
    std::mt19937_64 gen(31);
    for (int i = 0; i < 200; ++i) {
        auto s = testkit::random_censored(gen, 40);
        const auto a = statistic(s);
        for (auto& v : s.x) v = 3.0 * v * v * v + 1.0;
        const auto b = statistic(s);
        EXPECT_EQ(a.scores, b.scores);
        EXPECT_EQ(a.s_path, b.s_path);
        EXPECT_EQ(a.p_value, b.p_value);
        EXPECT_EQ(a.change_bin, b.change_bin);
    }
}

TEST(Pvalue, Endpoints) {
    EXPECT_EQ(pvalue(0.0), 1.0);
    EXPECT_THROW(pvalue(-0.1), std::invalid_argument);
    EXPECT_THROW(pvalue(std::nan("")), std::invalid_argument);
    EXPECT_EQ(pvalue(50.0), 0.0);
    EXPECT_NEAR(pvalue(0.05), 1.0, 1e-12);
}

TEST(Pvalue, ClassicalQuantiles) {
    EXPECT_NEAR(pvalue(1.3581), 0.05, 2e-4);
    EXPECT_NEAR(pvalue(1.6276), 0.01, 2e-4);
    EXPECT_NEAR(pvalue(1.0), 0.270, 5e-4);
}

TEST(Pvalue, MatchesSeriesOracle) {
    // the plain alternating series is accurate once b is not tiny
    for (double b = 0.4; b <= 4.0; b += 0.01) {
        EXPECT_NEAR(pvalue(b), testkit::kolmogorov_series(b), 1e-10) << b;
    }
}

TEST(Pvalue, ContinuousAcrossBranchSwitch) {
    EXPECT_NEAR(pvalue(std::nextafter(1.0, 0.0)), pvalue(1.0), 1e-12);
}

TEST(Pvalue, Monotone) {
    double prev = 1.0;
    for (int i = 0; i <= 2000; ++i) {
        const double p = pvalue(i * 0.0025);
        EXPECT_LE(p, prev);
        EXPECT_GE(p, 0.0);
        prev = p;
    }
}

TEST(Detect, AlarmsAtHalfLevel) {
    const auto a = detect(observed({1, 1, 5, 5}), 0.5);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->change_bin, 2);
    EXPECT_NEAR(a->p_value, 0.270, 5e-4);
    EXPECT_FALSE(detect(observed({1, 1, 5, 5}), 0.2));
}

TEST(Detect, DegenerateNeverAlarms) {
    EXPECT_FALSE(detect(observed({2, 2, 2}), 0.999));
}

TEST(Detect, TinyLevelOnNoise) {
    std::mt19937_64 gen(37);
    std::poisson_distribution<int> pois(3.0);
    std::vector<double> x(60);
    for (auto& v : x) v = pois(gen);
    EXPECT_FALSE(detect(observed(x), 1e-12));
}

TEST(Detect, RejectsLevelOutsideUnitInterval) {
    EXPECT_THROW(detect(observed({1, 2}), 0.0), std::invalid_argument);
    EXPECT_THROW(detect(observed({1, 2}), 1.0), std::invalid_argument);
}

TEST(Detect, CarriesMethodAndWindow) {
    const auto a = detect(observed({1, 1, 1, 9, 9, 9}), 0.9, Method::hashrank, 4);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->method, Method::hashrank);
    EXPECT_EQ(a->window_index, 4);
    EXPECT_EQ(a->key, 1u);
}
