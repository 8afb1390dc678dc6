#include "oracles.hpp"

#include <qkelly/shadow_kelly.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace qkelly;

TEST(ShadowPoint, PaperExamples)
{
    EXPECT_EQ(shadow_point(CountVector({2, 1}), 3, std::vector<Rational>{1, 1}),
              (Profile<Rational>{Rational(2, 3), Rational(1, 3)}));
    std::vector<Rational> thirds(3, Rational(1, 3));
    EXPECT_EQ(shadow_point(CountVector({1, 1, 0}), 2, thirds), (Profile<Rational>{Rational(3, 2), Rational(3, 2), 0}));
}

TEST(ShadowPoint, AllMassOnOneState)
{
    oracle::Gen g(41);
    for (int trial = 0; trial < 20; ++trial) {
        auto q = g.prices(2);
        int n = g.integer(1, 9);
        EXPECT_EQ(shadow_point(CountVector({n, 0}), n, q), (Profile<Rational>{1 / q[0], 0}));
    }
}

TEST(ShadowPoint, RejectsWrongHorizon)
{
    EXPECT_THROW(shadow_point(CountVector({2, 1}), 4, std::vector<double>{1, 1}), std::invalid_argument);
    EXPECT_THROW(shadow_point(CountVector({2, 1}), 3, std::vector<double>{1, 1, 1}), std::invalid_argument);
}

TEST(ShadowValue, PaperExamples)
{
    EXPECT_EQ(shadow_value(CountVector({2, 1}), 3, std::vector<Rational>{1, 1}), Rational(4, 27));
    EXPECT_NEAR(shadow_value(CountVector({2, 1}), 3, std::vector<double>{1, 1}), 4.0 / 27, 1e-15);
    std::vector<Rational> thirds(3, Rational(1, 3));
    EXPECT_EQ(shadow_value(CountVector({1, 1, 0}), 2, thirds), Rational(9, 4));
    EXPECT_NEAR(shadow_value(CountVector({1, 1, 0}), 2, to_double(thirds)), 2.25, 1e-14);
    EXPECT_EQ(shadow_value(CountVector({3, 0}), 3, std::vector<Rational>{1, 1}), 1);
}

TEST(ShadowValue, LargeHorizonStaysRepresentable)
{
    double v = shadow_value(CountVector({600, 400}), 1000, std::vector<double>{1, 1});
    EXPECT_GT(v, 0.0);
    EXPECT_NEAR(std::log(v), 600 * std::log(0.6) + 400 * std::log(0.4), 1e-9);
}

TEST(KellyPoint, PaperExamples)
{
    std::vector<Rational> thirds(3, Rational(1, 3));
    EXPECT_EQ(kelly_point(std::vector<Rational>{Rational(3, 5), Rational(3, 10), Rational(1, 10)}, thirds),
              (Profile<Rational>{Rational(9, 5), Rational(9, 10), Rational(3, 10)}));
    EXPECT_EQ(kelly_point(std::vector<Rational>{Rational(3, 5), Rational(2, 5)}, std::vector<Rational>{1, 1}),
              (Profile<Rational>{Rational(3, 5), Rational(2, 5)}));
}

TEST(KellyValue, BinaryFormula)
{
    double direct = 0.6 * std::log(0.6) + 0.4 * std::log(0.4);
    EXPECT_NEAR(kelly_value(std::vector<double>{0.6, 0.4}, std::vector<double>{1, 1}), direct, 1e-15);
    EXPECT_NEAR(direct, -0.67301, 1e-5);
    EXPECT_NEAR(kelly_value(std::vector<Rational>{Rational(3, 5), Rational(2, 5)}, std::vector<Rational>{1, 1}), direct,
                1e-15);
}

TEST(KellyValue, MaximizesExpectedLog)
{
    oracle::Gen g(42);
    for (int trial = 0; trial < 200; ++trial) {
        int m = g.integer(2, 4);
        auto p = to_double(g.probabilities(m));
        auto q = to_double(g.prices(m));
        double best = kelly_value(p, q);
        auto W = g.simplex_point(q);
        double L = 0;
        for (int i = 0; i < m; ++i) L += p[static_cast<std::size_t>(i)] * std::log(W[static_cast<std::size_t>(i)]);
        EXPECT_LE(L, best + 1e-12);
    }
}

TEST(ShadowProperties, AmGmOptimalityAndUniqueness)
{
    oracle::Gen g(43);
    for (int m = 2; m <= 4; ++m)
        for (int n = 1; n <= 5; ++n) {
            auto q = to_double(g.prices(m));
            for (const auto& k : enumerate_counts(m, n)) {
                double top = shadow_value(k, n, q);
                auto star = shadow_point(k, n, q);
                EXPECT_NEAR(monomial_value(star, k), top, 1e-12 * top);
                for (int s = 0; s < 1000; ++s) {
                    auto W = g.simplex_point(q);
                    double v = monomial_value(W, k);
                    ASSERT_LE(v, top * (1 + 1e-12)) << k.to_string();
                    if (std::abs(v - top) <= 1e-12 * top) {
                        double dist = 0;
                        for (int i = 0; i < m; ++i)
                            dist = std::max(dist, std::abs(W[static_cast<std::size_t>(i)] - star[static_cast<std::size_t>(i)]));
                        EXPECT_LT(dist, 1e-8) << k.to_string();
                    }
                }
            }
        }
}

TEST(ShadowProperties, BudgetIsExact)
{
    oracle::Gen g(44);
    for (int m = 2; m <= 4; ++m)
        for (int n = 1; n <= 6; ++n) {
            auto q = g.prices(m);
            for (const auto& k : enumerate_counts(m, n)) {
                auto W = shadow_point(k, n, q);
                EXPECT_EQ(budget_residual(W, q), 0);
                for (int i = 0; i < m; ++i) EXPECT_EQ(W[static_cast<std::size_t>(i)] == 0, k[i] == 0);
                EXPECT_EQ(monomial_value(W, k), shadow_value(k, n, q));
            }
        }
}

TEST(ShadowProperties, ShadowLawIdentity)
{
    oracle::Gen g(45);
    for (int m = 2; m <= 4; ++m)
        for (int n = 1; n <= 5; ++n) {
            auto q = g.prices(m);
            for (const auto& k : enumerate_counts(m, n)) {
                auto law = shadow_law(k);
                Rational total = 0;
                for (const auto& v : law) total += v;
                EXPECT_EQ(total, 1);
                EXPECT_EQ(shadow_point(k, n, q), kelly_point(law, q));
            }
        }
}

TEST(ShadowProperties, FloatMatchesExact)
{
    oracle::Gen g(46);
    for (int m = 2; m <= 4; ++m)
        for (int n = 1; n <= 5; ++n) {
            auto q = g.prices(m);
            auto qd = to_double(q);
            for (const auto& k : enumerate_counts(m, n)) {
                double exact = to_double(shadow_value(k, n, q));
                EXPECT_NEAR(shadow_value(k, n, qd), exact, 1e-13 * exact);
            }
        }
}
