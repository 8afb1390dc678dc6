#ifndef QKELLY_INTEGER_LINALG_HPP
#define QKELLY_INTEGER_LINALG_HPP

#include "rational.hpp"

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qkelly {

using Int = long long;
using IntVec = std::vector<Int>;

namespace detail {

inline Int narrow(__int128 v)
{
    if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
        throw std::overflow_error("integer overflow in arrangement arithmetic");
    return static_cast<Int>(v);
}

inline Int narrow(const BigInt& v)
{
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("integer overflow in arrangement arithmetic");
    return v.convert_to<Int>();
}

} // namespace detail

inline Int dot(const IntVec& a, const IntVec& b)
{
    __int128 s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<__int128>(a[i]) * b[i];
    return detail::narrow(s);
}

inline int sign_of(Int v) { return (v > 0) - (v < 0); }

inline bool is_zero(const IntVec& v)
{
    for (Int x : v)
        if (x != 0) return false;
    return true;
}

/// Divides by the gcd and flips so the first nonzero entry is positive.
/// Returns the sign of the removed factor (+1 or -1); v must be nonzero.
inline int canonicalize(IntVec& v)
{
    Int g = 0;
    for (Int x : v) g = std::gcd(g, x < 0 ? -x : x);
    if (g == 0) throw std::invalid_argument("cannot canonicalize the zero vector");
    int orient = 1;
    for (Int x : v)
        if (x != 0) {
            orient = x > 0 ? 1 : -1;
            break;
        }
    for (Int& x : v) x = x / g * orient;
    return orient;
}

/// Integer basis (primitive columns) of { y : rows * y = 0 } in dimension dim.
inline std::vector<IntVec> nullspace(const std::vector<IntVec>& rows, std::size_t dim)
{
    std::vector<std::vector<Rational>> a;
    for (const auto& r : rows) {
        std::vector<Rational> row;
        for (Int x : r) row.emplace_back(x);
        a.push_back(std::move(row));
    }
    std::vector<int> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < dim && r < a.size(); ++c) {
        std::size_t piv = r;
        while (piv < a.size() && a[piv][c] == 0) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[r]);
        Rational inv = 1 / a[r][c];
        for (auto& x : a[r]) x *= inv;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r || a[i][c] == 0) continue;
            Rational f = a[i][c];
            for (std::size_t j = 0; j < dim; ++j) a[i][j] -= f * a[r][j];
        }
        pivot_col.push_back(static_cast<int>(c));
        ++r;
    }
    std::vector<bool> is_pivot(dim, false);
    for (int c : pivot_col) is_pivot[static_cast<std::size_t>(c)] = true;
    std::vector<IntVec> basis;
    for (std::size_t f = 0; f < dim; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rational> v(dim, Rational(0));
        v[f] = 1;
        for (std::size_t i = 0; i < pivot_col.size(); ++i) v[static_cast<std::size_t>(pivot_col[i])] = -a[i][f];
        BigInt l = 1;
        for (const auto& x : v) l = boost::multiprecision::lcm(l, BigInt(denominator(x)));
        IntVec iv;
        for (const auto& x : v) iv.push_back(detail::narrow(BigInt(numerator(x) * (l / denominator(x)))));
        canonicalize(iv);
        basis.push_back(std::move(iv));
    }
    return basis;
}

inline int matrix_rank(const std::vector<IntVec>& rows, std::size_t dim)
{
    return static_cast<int>(dim - nullspace(rows, dim).size());
}

/// Coordinates of the restriction of a linear form to the span of the given columns.
inline IntVec restrict_form(const IntVec& c, const std::vector<IntVec>& basis)
{
    IntVec r;
    r.reserve(basis.size());
    for (const auto& b : basis) r.push_back(dot(c, b));
    return r;
}

/// Maps flat coordinates y to ambient coordinates sum_j y_j basis_j.
inline IntVec embed(const IntVec& y, const std::vector<IntVec>& basis, std::size_t dim)
{
    std::vector<__int128> acc(dim, 0);
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (std::size_t i = 0; i < dim; ++i) acc[i] += static_cast<__int128>(y[j]) * basis[j][i];
    IntVec out;
    for (auto v : acc) out.push_back(detail::narrow(v));
    return out;
}

} // namespace qkelly

#endif // QKELLY_INTEGER_LINALG_HPP
