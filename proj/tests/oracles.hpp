#ifndef QKELLY_TESTS_ORACLES_HPP
#define QKELLY_TESTS_ORACLES_HPP

#include <qkelly/rational.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using qkelly::Rational;

// Every outcome sequence of length n over m outcomes, as a list of per-step outcome indices.
inline void for_each_sequence(int m, int n, const std::function<void(const std::vector<int>&)>& fn)
{
    std::vector<int> seq(static_cast<std::size_t>(n), 0);
    for (;;) {
        fn(seq);
        int pos = n - 1;
        while (pos >= 0 && seq[static_cast<std::size_t>(pos)] == m - 1) seq[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) return;
        ++seq[static_cast<std::size_t>(pos)];
    }
}

// Law of the count vector built by summing sequence probabilities.
inline std::map<std::vector<int>, Rational> count_law(const std::vector<Rational>& p, int n)
{
    std::map<std::vector<int>, Rational> law;
    const int m = static_cast<int>(p.size());
    for_each_sequence(m, n, [&](const std::vector<int>& seq) {
        std::vector<int> k(static_cast<std::size_t>(m), 0);
        Rational pr = 1;
        for (int o : seq) {
            ++k[static_cast<std::size_t>(o)];
            pr *= p[static_cast<std::size_t>(o)];
        }
        law[k] += pr;
    });
    return law;
}

// Terminal wealth law at W: value -> probability, by multiplying per-step wealth along each sequence.
inline std::map<Rational, Rational> wealth_law(const std::vector<Rational>& p, const std::vector<Rational>& W, int n)
{
    std::map<Rational, Rational> law;
    const int m = static_cast<int>(p.size());
    for_each_sequence(m, n, [&](const std::vector<int>& seq) {
        Rational x = 1, pr = 1;
        for (int o : seq) {
            x *= W[static_cast<std::size_t>(o)];
            pr *= p[static_cast<std::size_t>(o)];
        }
        law[x] += pr;
    });
    return law;
}

// sup { t >= 0 : P(X >= t) >= alpha } read off the atoms directly.
inline Rational upper_quantile(const std::map<Rational, Rational>& law, const Rational& alpha)
{
    Rational best = 0;
    for (const auto& [t, unused] : law) {
        Rational tail = 0;
        for (const auto& [v, pr] : law)
            if (v >= t) tail += pr;
        if (tail >= alpha && t > best) best = t;
    }
    return best;
}

inline Rational brute_quantile(const std::vector<Rational>& p, const std::vector<Rational>& W, int n,
                               const Rational& alpha)
{
    return upper_quantile(wealth_law(p, W, n), alpha);
}

inline double brute_quantile(const std::vector<double>& p, const std::vector<double>& W, int n, double alpha)
{
    std::vector<std::pair<double, double>> atoms;
    const int m = static_cast<int>(p.size());
    for_each_sequence(m, n, [&](const std::vector<int>& seq) {
        double x = 1, pr = 1;
        for (int o : seq) {
            x *= W[static_cast<std::size_t>(o)];
            pr *= p[static_cast<std::size_t>(o)];
        }
        atoms.emplace_back(x, pr);
    });
    double best = 0;
    for (const auto& [t, unused] : atoms) {
        double tail = 0;
        for (const auto& [v, pr] : atoms)
            if (v >= t * (1 - 1e-12)) tail += pr;
        if (tail >= alpha - 1e-12 && t > best) best = t;
    }
    return best;
}

// Deterministic generators for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    // Probability vector with small denominators and all entries positive.
    std::vector<Rational> probabilities(int m, int denom = 20)
    {
        std::vector<int> w(static_cast<std::size_t>(m), 1);
        for (int left = denom - m; left > 0; --left) ++w[static_cast<std::size_t>(integer(0, m - 1))];
        std::vector<Rational> p;
        for (int v : w) p.push_back(Rational(v, denom));
        return p;
    }

    std::vector<Rational> prices(int m)
    {
        static const int nums[] = {1, 1, 2, 3, 1, 3, 1};
        static const int dens[] = {1, 2, 3, 4, 3, 2, 4};
        std::vector<Rational> q;
        for (int i = 0; i < m; ++i) {
            int j = integer(0, 6);
            q.push_back(Rational(nums[j], dens[j]));
        }
        return q;
    }

    // Point of the closed simplex q.W = 1 with support exactly S (0-based indices).
    std::vector<double> simplex_point(const std::vector<double>& q, const std::vector<int>& S)
    {
        std::vector<double> W(q.size(), 0.0);
        double total = 0;
        std::vector<double> e;
        for (std::size_t t = 0; t < S.size(); ++t) {
            e.push_back(-std::log(uniform(1e-9, 1.0)));
            total += e.back();
        }
        for (std::size_t t = 0; t < S.size(); ++t) {
            auto i = static_cast<std::size_t>(S[t]);
            W[i] = e[t] / total / q[i];
        }
        return W;
    }

    std::vector<double> simplex_point(const std::vector<double>& q)
    {
        std::vector<int> S(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) S[i] = static_cast<int>(i);
        return simplex_point(q, S);
    }

    // Exact rational point with full support: weights j_i / (D q_i).
    std::vector<Rational> rational_point(const std::vector<Rational>& q, int D = 60)
    {
        const int m = static_cast<int>(q.size());
        std::vector<int> j(static_cast<std::size_t>(m), 1);
        for (int left = D - m; left > 0; --left) ++j[static_cast<std::size_t>(integer(0, m - 1))];
        std::vector<Rational> W;
        for (int i = 0; i < m; ++i) W.push_back(Rational(j[static_cast<std::size_t>(i)]) / (Rational(D) * q[static_cast<std::size_t>(i)]));
        return W;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

} // namespace oracle

#endif // QKELLY_TESTS_ORACLES_HPP
