#ifndef QKELLY_EXACT_LP_HPP
#define QKELLY_EXACT_LP_HPP

#include "integer_linalg.hpp"
#include "rational.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace qkelly {

/// Homogeneous system { c.t > 0 for strict rows, g.t >= 0 for weak rows, e.t = 0 for equalities }.
struct ConeSystem {
    std::size_t dim = 0;
    std::vector<IntVec> strict;
    std::vector<IntVec> weak;
    std::vector<IntVec> equal;
};

inline bool satisfies(const ConeSystem& sys, const std::vector<Rational>& t)
{
    auto eval = [&](const IntVec& row) {
        Rational s = 0;
        for (std::size_t i = 0; i < sys.dim; ++i) s += Rational(row[i]) * t[i];
        return s;
    };
    for (const auto& r : sys.strict)
        if (eval(r) <= 0) return false;
    for (const auto& r : sys.weak)
        if (eval(r) < 0) return false;
    for (const auto& r : sys.equal)
        if (eval(r) != 0) return false;
    return true;
}

/// Exact witness for the system, or nullopt when it is infeasible.
/// Solves max s subject to c.t >= s, g.t >= 0, e.t = 0, s <= 1 with Bland's rule on a condensed tableau.
inline std::optional<std::vector<Rational>> strictly_feasible(const ConeSystem& sys)
{
    const std::size_t d = sys.dim;
    if (sys.strict.empty()) return std::vector<Rational>(d, Rational(0));
    if (d == 0) return std::nullopt;

    // Variables: t+ (d), t- (d), s; rows written as a.x <= b with b >= 0.
    const std::size_t nvars = 2 * d + 1;
    std::vector<std::vector<Rational>> T;
    std::vector<Rational> b;
    auto add_row = [&](const IntVec& coeff, int s_coeff, int rhs) {
        std::vector<Rational> row(nvars);
        for (std::size_t i = 0; i < d; ++i) {
            row[i] = coeff[i];
            row[d + i] = -coeff[i];
        }
        row[2 * d] = s_coeff;
        T.push_back(std::move(row));
        b.emplace_back(rhs);
    };
    IntVec neg(d);
    for (const auto& c : sys.strict) {
        for (std::size_t i = 0; i < d; ++i) neg[i] = -c[i];
        add_row(neg, 1, 0);
    }
    for (const auto& g : sys.weak) {
        for (std::size_t i = 0; i < d; ++i) neg[i] = -g[i];
        add_row(neg, 0, 0);
    }
    for (const auto& e : sys.equal) {
        add_row(e, 0, 0);
        for (std::size_t i = 0; i < d; ++i) neg[i] = -e[i];
        add_row(neg, 0, 0);
    }
    add_row(IntVec(d, 0), 1, 1);

    const std::size_t rows = T.size();
    std::vector<std::size_t> nonbasic(nvars), basic(rows);
    for (std::size_t j = 0; j < nvars; ++j) nonbasic[j] = j;
    for (std::size_t i = 0; i < rows; ++i) basic[i] = nvars + i;
    std::vector<Rational> obj(nvars, Rational(0));
    obj[2 * d] = 1;
    Rational z0 = 0;

    auto extract = [&]() {
        std::vector<Rational> x(nvars, Rational(0));
        for (std::size_t i = 0; i < rows; ++i)
            if (basic[i] < nvars) x[basic[i]] = b[i];
        std::vector<Rational> t(d);
        for (std::size_t i = 0; i < d; ++i) t[i] = x[i] - x[d + i];
        return t;
    };

    for (std::size_t iter = 0; iter < 100000; ++iter) {
        if (z0 > 0) {
            auto t = extract();
            if (!satisfies(sys, t)) throw std::logic_error("exact LP produced an invalid witness");
            return t;
        }
        std::size_t s = nvars;
        for (std::size_t j = 0; j < nvars; ++j)
            if (obj[j] > 0 && (s == nvars || nonbasic[j] < nonbasic[s])) s = j;
        if (s == nvars) return std::nullopt;
        std::size_t r = rows;
        Rational best;
        for (std::size_t i = 0; i < rows; ++i) {
            if (T[i][s] <= 0) continue;
            Rational ratio = b[i] / T[i][s];
            if (r == rows || ratio < best || (ratio == best && basic[i] < basic[r])) {
                r = i;
                best = ratio;
            }
        }
        if (r == rows) throw std::logic_error("exact LP unexpectedly unbounded");
        const Rational p = T[r][s];
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || T[i][s] == 0) continue;
            const Rational f = T[i][s] / p;
            for (std::size_t j = 0; j < nvars; ++j)
                if (j != s && T[r][j] != 0) T[i][j] -= f * T[r][j];
            b[i] -= f * b[r];
            T[i][s] = -f;
        }
        if (obj[s] != 0) {
            const Rational f = obj[s] / p;
            for (std::size_t j = 0; j < nvars; ++j)
                if (j != s && T[r][j] != 0) obj[j] -= f * T[r][j];
            z0 += f * b[r];
            obj[s] = -f;
        }
        for (std::size_t j = 0; j < nvars; ++j)
            if (j != s) T[r][j] /= p;
        b[r] /= p;
        T[r][s] = 1 / p;
        std::swap(basic[r], nonbasic[s]);
    }
    throw std::runtime_error("exact LP iteration limit reached");
}

} // namespace qkelly

#endif // QKELLY_EXACT_LP_HPP
