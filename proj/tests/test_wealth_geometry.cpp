#include "oracles.hpp"

#include <qkelly/wealth_geometry.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace qkelly;

namespace {

const std::vector<double> kThirds{1.0 / 3, 1.0 / 3, 1.0 / 3};

} // namespace

TEST(SupportOf, PaperAndBoundaryPoints)
{
    EXPECT_EQ(support_of(Profile<Rational>{Rational(3, 2), Rational(3, 2), 0}), SupportSet({0, 1}));
    EXPECT_EQ(support_of(Profile<double>{1.5, 1.5, 0.0}, kThirds), SupportSet({0, 1}));
    EXPECT_EQ(support_of(Profile<double>{1.0, 1.0, 1.0}, kThirds), SupportSet::full(3));
    EXPECT_EQ(support_of(Profile<double>{0.0, 0.0, 3.0}, kThirds), SupportSet({2}));
}

TEST(SupportOf, FloatThresholdScalesWithPrice)
{
    std::vector<double> q{1e-3, 1.0};
    EXPECT_EQ(support_of(Profile<double>{5e-10, 1.0}, q), SupportSet({1}));
    EXPECT_EQ(support_of(Profile<double>{5e-10, 1.0}, std::vector<double>{1.0, 1.0}), SupportSet({0, 1}));
}

TEST(MonomialValue, PaperValues)
{
    EXPECT_EQ(monomial_value(Profile<Rational>{Rational(2, 3), Rational(1, 3)}, CountVector({2, 1})), Rational(4, 27));
    EXPECT_EQ(monomial_value(Profile<Rational>{Rational(3, 2), Rational(3, 2), 0}, CountVector({1, 1, 0})),
              Rational(9, 4));
    EXPECT_EQ(monomial_value(Profile<Rational>{Rational(3, 2), Rational(3, 2), 0}, CountVector({1, 0, 1})), 0);
    EXPECT_DOUBLE_EQ(monomial_value(Profile<double>{0.0, 2.0}, CountVector({0, 2})), 4.0);
}

TEST(MonomialValue, ZeroExactlyWhenZeroCoordinateHasPositiveExponent)
{
    oracle::Gen g(21);
    for (int trial = 0; trial < 200; ++trial) {
        int m = g.integer(2, 4);
        std::vector<int> k(static_cast<std::size_t>(m));
        for (auto& v : k) v = g.integer(0, 3);
        Profile<Rational> W(static_cast<std::size_t>(m));
        bool expect_zero = false;
        for (int i = 0; i < m; ++i) {
            bool zero = g.integer(0, 2) == 0;
            W[static_cast<std::size_t>(i)] = zero ? Rational(0) : Rational(g.integer(1, 9), g.integer(1, 9));
            if (zero && k[static_cast<std::size_t>(i)] > 0) expect_zero = true;
        }
        EXPECT_EQ(monomial_value(W, CountVector(k)) == 0, expect_zero);
    }
}

TEST(Ratio, ToRatioExamples)
{
    auto a = to_ratio(Profile<double>{1.5, 1.5, 0.0}, kThirds);
    ASSERT_EQ(a.z.size(), 1u);
    EXPECT_EQ(a.z[0], 0.0);
    auto b = to_ratio(Profile<double>{2.0 / 3, 1.0 / 3}, std::vector<double>{1, 1});
    EXPECT_NEAR(b.z[0], std::log(0.5), 1e-15);
    auto c = to_ratio(Profile<double>{1.8, 0.9, 0.3}, kThirds);
    EXPECT_NEAR(c.z[0], std::log(0.5), 1e-15);
    EXPECT_NEAR(c.z[1], std::log(1.0 / 6), 1e-15);
}

TEST(Ratio, FromRatioExamples)
{
    auto W = from_ratio(RatioPoint{SupportSet({0, 1}), {0.0}}, std::vector<double>{1, 1, 1});
    EXPECT_DOUBLE_EQ(W[0], 0.5);
    EXPECT_DOUBLE_EQ(W[1], 0.5);
    EXPECT_EQ(W[2], 0.0);
    auto T = from_ratio(RatioPoint{SupportSet({0, 1}), {0.0}}, kThirds);
    EXPECT_NEAR(T[0], 1.5, 1e-15);
    EXPECT_NEAR(T[1], 1.5, 1e-15);
    EXPECT_EQ(T[2], 0.0);
}

TEST(Ratio, ExtremeCoordinatesStayFinite)
{
    auto W = from_ratio(RatioPoint{SupportSet::full(3), {900.0, -900.0}}, kThirds);
    for (double w : W) EXPECT_TRUE(std::isfinite(w));
    EXPECT_NEAR(budget_residual(W, kThirds), 0.0, 1e-12);
}

TEST(Ratio, ChartBijectionProperty)
{
    oracle::Gen g(7);
    for (int trial = 0; trial < 500; ++trial) {
        int m = g.integer(2, 4);
        std::vector<double> q;
        for (int i = 0; i < m; ++i) q.push_back(g.uniform(0.2, 3.0));
        auto supports = all_supports(m);
        const auto& S = supports[static_cast<std::size_t>(g.integer(0, static_cast<int>(supports.size()) - 1))];
        RatioPoint zp{S, {}};
        for (int j = 0; j < S.chart_dim(); ++j) zp.z.push_back(g.uniform(-20, 20));
        auto W = from_ratio(zp, q);
        // Spreads beyond e^20 push coordinates under the float zero threshold.
        bool moderate = true;
        for (double v : zp.z) moderate = moderate && std::abs(v) <= 10;
        if (moderate) {
            EXPECT_EQ(support_of(W, q), S);
        }
        EXPECT_NEAR(budget_residual(W, q), 0.0, 1e-10);
        auto back = to_ratio(W, S);
        for (std::size_t j = 0; j < zp.z.size(); ++j) EXPECT_NEAR(back.z[j], zp.z[j], 1e-10);
        auto again = from_ratio(to_ratio(W, S), q);
        for (int i = 0; i < m; ++i)
            EXPECT_NEAR(again[static_cast<std::size_t>(i)], W[static_cast<std::size_t>(i)],
                        1e-12 * std::max(1.0, W[static_cast<std::size_t>(i)]));
    }
}

TEST(Ratio, LogMonomialDecomposition)
{
    oracle::Gen g(8);
    for (int trial = 0; trial < 300; ++trial) {
        int m = g.integer(2, 4), n = g.integer(1, 6);
        std::vector<double> q;
        for (int i = 0; i < m; ++i) q.push_back(g.uniform(0.2, 3.0));
        auto S = SupportSet::full(m);
        RatioPoint zp{S, {}};
        for (int j = 0; j < S.chart_dim(); ++j) zp.z.push_back(g.uniform(-5, 5));
        auto W = from_ratio(zp, q);
        auto counts = enumerate_counts(m, n);
        const auto& k = counts[static_cast<std::size_t>(g.integer(0, static_cast<int>(counts.size()) - 1))];
        double rhs = n * std::log(W[0]);
        for (int j = 0; j < S.chart_dim(); ++j) rhs += k[j + 1] * zp.z[static_cast<std::size_t>(j)];
        EXPECT_NEAR(log_monomial(W, k), rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(Ratio, MonomialComparisonIsLinear)
{
    oracle::Gen g(9);
    for (int trial = 0; trial < 300; ++trial) {
        int m = g.integer(2, 4), n = g.integer(1, 5);
        std::vector<double> q;
        for (int i = 0; i < m; ++i) q.push_back(g.uniform(0.2, 3.0));
        auto S = SupportSet::full(m);
        RatioPoint zp{S, {}};
        for (int j = 0; j < S.chart_dim(); ++j) zp.z.push_back(g.uniform(-3, 3));
        auto W = from_ratio(zp, q);
        auto counts = enumerate_counts(m, n);
        const auto& a = counts[static_cast<std::size_t>(g.integer(0, static_cast<int>(counts.size()) - 1))];
        const auto& b = counts[static_cast<std::size_t>(g.integer(0, static_cast<int>(counts.size()) - 1))];
        double form = 0;
        for (int j = 0; j < S.chart_dim(); ++j) form += (a[j + 1] - b[j + 1]) * zp.z[static_cast<std::size_t>(j)];
        double diff = log_monomial(W, a) - log_monomial(W, b);
        if (std::abs(form) > 1e-9) {
            EXPECT_EQ(form > 0, diff > 0);
        }
    }
}

TEST(BudgetResidual, Examples)
{
    EXPECT_EQ(budget_residual(Profile<Rational>{Rational(2, 3), Rational(1, 3)}, std::vector<Rational>{1, 1}), 0);
    std::vector<Rational> thirds(3, Rational(1, 3));
    EXPECT_EQ(budget_residual(Profile<Rational>{Rational(9, 5), Rational(9, 10), Rational(3, 10)}, thirds), 0);
    EXPECT_EQ(budget_residual(Profile<Rational>{1, 1}, std::vector<Rational>{1, 1}), 1);
    EXPECT_THROW(budget_residual(Profile<double>{1.0}, std::vector<double>{1, 1}), std::invalid_argument);
}

TEST(ExactChart, RatiosGiveExactProfile)
{
    std::vector<Rational> q(3, Rational(1, 3));
    auto W = from_ratios_exact(SupportSet({0, 1}), {Rational(1)}, q);
    EXPECT_EQ(W, (Profile<Rational>{Rational(3, 2), Rational(3, 2), 0}));
    EXPECT_EQ(equal_wealth_point(SupportSet::full(3), q), (Profile<Rational>{1, 1, 1}));
}
