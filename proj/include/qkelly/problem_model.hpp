#ifndef QKELLY_PROBLEM_MODEL_HPP
#define QKELLY_PROBLEM_MODEL_HPP

#include "rational.hpp"
#include "support_set.hpp"

#include <compare>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkelly {

/// Multinomial tally of outcomes over the horizon.
struct CountVector {
    std::vector<int> k;
    int n = 0;

    CountVector() = default;
    explicit CountVector(std::vector<int> counts) : k(std::move(counts)), n(std::accumulate(k.begin(), k.end(), 0))
    {
        for (int v : k)
            if (v < 0) throw std::invalid_argument("count vector entries must be nonnegative");
    }

    int size() const { return static_cast<int>(k.size()); }
    int operator[](int i) const { return k[static_cast<std::size_t>(i)]; }

    bool supported_in(const SupportSet& S) const
    {
        for (int i = 0; i < size(); ++i)
            if (k[static_cast<std::size_t>(i)] > 0 && !S.contains(i)) return false;
        return true;
    }

    SupportSet support() const
    {
        std::vector<int> s;
        for (int i = 0; i < size(); ++i)
            if (k[static_cast<std::size_t>(i)] > 0) s.push_back(i);
        return SupportSet(std::move(s));
    }

    std::string to_string() const
    {
        std::string s = "(";
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(k[i]);
        }
        return s + ")";
    }

    auto operator<=>(const CountVector&) const = default;
};

struct ProblemInstance {
    int m = 0;
    std::vector<Rational> p;
    std::vector<Rational> q;
    int n = 0;
    Rational alpha;
    bool exact_mode = true;

    std::vector<double> p_double() const { return to_double(p); }
    std::vector<double> q_double() const { return to_double(q); }
    double alpha_double() const { return to_double(alpha); }
};

enum class ValidationCode {
    OutcomeCount,
    DimensionMismatch,
    Horizon,
    NonPositiveProbability,
    ProbabilitySum,
    NonPositivePrice,
    AlphaRange,
    Parse,
};

class ValidationError : public std::invalid_argument {
public:
    ValidationError(ValidationCode code, const std::string& what) : std::invalid_argument(what), code_(code) {}
    ValidationCode code() const { return code_; }

private:
    ValidationCode code_;
};

inline constexpr double kFloatSumTolerance = 1e-12;

inline ProblemInstance validate_instance(int m, std::vector<Rational> p, std::vector<Rational> q, int n,
                                         Rational alpha, bool exact_mode = true)
{
    if (m < 2) throw ValidationError(ValidationCode::OutcomeCount, "outcome count m must be at least 2");
    if (static_cast<int>(p.size()) != m)
        throw ValidationError(ValidationCode::DimensionMismatch,
                              "p has " + std::to_string(p.size()) + " entries, expected " + std::to_string(m));
    if (static_cast<int>(q.size()) != m)
        throw ValidationError(ValidationCode::DimensionMismatch,
                              "q has " + std::to_string(q.size()) + " entries, expected " + std::to_string(m));
    if (n < 1) throw ValidationError(ValidationCode::Horizon, "horizon n must be at least 1");
    for (int i = 0; i < m; ++i)
        if (p[static_cast<std::size_t>(i)] <= 0)
            throw ValidationError(ValidationCode::NonPositiveProbability,
                                  "probability p_" + std::to_string(i + 1) + " must be strictly positive");
    Rational total = 0;
    for (const auto& v : p) total += v;
    bool sums_to_one = exact_mode ? total == 1 : std::abs(to_double(total - 1)) <= kFloatSumTolerance;
    if (!sums_to_one)
        throw ValidationError(ValidationCode::ProbabilitySum,
                              "probabilities do not sum to 1 (sum is " + to_string(total) + ")");
    for (int i = 0; i < m; ++i)
        if (q[static_cast<std::size_t>(i)] <= 0)
            throw ValidationError(ValidationCode::NonPositivePrice,
                                  "state price q_" + std::to_string(i + 1) + " must be strictly positive");
    if (alpha <= 0 || alpha >= 1)
        throw ValidationError(ValidationCode::AlphaRange, "alpha must lie in the open interval (0,1)");
    return ProblemInstance{m, std::move(p), std::move(q), n, std::move(alpha), exact_mode};
}

/// Float-mode construction: each double is stored as its exact binary rational.
inline ProblemInstance validate_instance(int m, const std::vector<double>& p, const std::vector<double>& q, int n,
                                         double alpha)
{
    auto conv = [](const std::vector<double>& v) {
        std::vector<Rational> out;
        for (double x : v) out.push_back(exact_from_double(x));
        return out;
    };
    return validate_instance(m, conv(p), conv(q), n, exact_from_double(alpha), false);
}

/// Literal construction ("0.6", "1/3"); literals are exact, so exact_mode is on.
inline ProblemInstance validate_instance(int m, const std::vector<std::string>& p, const std::vector<std::string>& q,
                                         int n, const std::string& alpha)
{
    auto conv = [](const std::vector<std::string>& v) {
        std::vector<Rational> out;
        for (const auto& s : v) out.push_back(parse_rational(s));
        return out;
    };
    try {
        return validate_instance(m, conv(p), conv(q), n, parse_rational(alpha), true);
    } catch (const ValidationError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ValidationError(ValidationCode::Parse, e.what());
    }
}

namespace detail {

inline void enumerate_counts_rec(int m, int remaining, std::vector<int>& prefix, std::vector<CountVector>& out)
{
    if (static_cast<int>(prefix.size()) == m - 1) {
        prefix.push_back(remaining);
        out.emplace_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        prefix.push_back(v);
        enumerate_counts_rec(m, remaining - v, prefix, out);
        prefix.pop_back();
    }
}

} // namespace detail

/// All count vectors of length m summing to n, in reverse-lexicographic order.
inline std::vector<CountVector> enumerate_counts(int m, int n)
{
    if (m < 1 || n < 0) throw std::invalid_argument("enumerate_counts needs m >= 1 and n >= 0");
    std::vector<CountVector> out;
    std::vector<int> prefix;
    detail::enumerate_counts_rec(m, n, prefix, out);
    return out;
}

inline BigInt binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    return factorial(static_cast<unsigned>(n)) /
           (factorial(static_cast<unsigned>(k)) * factorial(static_cast<unsigned>(n - k)));
}

inline Rational multinomial_mass(const ProblemInstance& inst, const CountVector& k)
{
    if (k.size() != inst.m || k.n != inst.n)
        throw std::invalid_argument("count vector " + k.to_string() + " incompatible with instance");
    BigInt coeff = factorial(static_cast<unsigned>(inst.n));
    for (int v : k.k) coeff /= factorial(static_cast<unsigned>(v));
    Rational mass(coeff);
    for (int i = 0; i < inst.m; ++i) mass *= pow(inst.p[static_cast<std::size_t>(i)], static_cast<unsigned>(k[i]));
    return mass;
}

/// Probability that no outcome outside S occurs, (sum_{i in S} p_i)^n.
inline Rational support_mass(const ProblemInstance& inst, const SupportSet& S)
{
    Rational s = 0;
    for (int i : S.idx) {
        if (i < 0 || i >= inst.m) throw std::invalid_argument("support index out of range");
        s += inst.p[static_cast<std::size_t>(i)];
    }
    return pow(s, static_cast<unsigned>(inst.n));
}

/// Count vectors of an instance with their masses, in enumeration order.
struct CountTable {
    std::vector<CountVector> counts;
    std::vector<Rational> mass;
    std::vector<double> mass_double;

    std::size_t size() const { return counts.size(); }
};

inline CountTable count_table(const ProblemInstance& inst)
{
    CountTable t;
    t.counts = enumerate_counts(inst.m, inst.n);
    for (const auto& k : t.counts) {
        t.mass.push_back(multinomial_mass(inst, k));
        t.mass_double.push_back(to_double(t.mass.back()));
    }
    return t;
}

} // namespace qkelly

#endif // QKELLY_PROBLEM_MODEL_HPP
