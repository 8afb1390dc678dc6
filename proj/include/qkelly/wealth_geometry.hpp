#ifndef QKELLY_WEALTH_GEOMETRY_HPP
#define QKELLY_WEALTH_GEOMETRY_HPP

#include "problem_model.hpp"
#include "rational.hpp"
#include "support_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <stdexcept>
#include <vector>

namespace qkelly {

/// A wealth profile is a plain coordinate vector; T is double or Rational.
template <class T>
using Profile = std::vector<T>;

inline constexpr double kZeroThreshold = 1e-12;
inline constexpr double kRatioClamp = 700.0;

/// Log wealth ratios z_i = log(W_i / W_anchor) over S minus its anchor.
struct RatioPoint {
    SupportSet S;
    std::vector<double> z;
};

template <class T>
T budget_residual(const Profile<T>& W, const std::vector<T>& q)
{
    if (W.size() != q.size()) throw std::invalid_argument("budget_residual: dimension mismatch");
    T s = 0;
    for (std::size_t i = 0; i < W.size(); ++i) s += q[i] * W[i];
    return s - T(1);
}

inline SupportSet support_of(const Profile<Rational>& W)
{
    std::vector<int> s;
    for (std::size_t i = 0; i < W.size(); ++i) {
        if (W[i] < 0) throw std::invalid_argument("wealth coordinates must be nonnegative");
        if (W[i] > 0) s.push_back(static_cast<int>(i));
    }
    return SupportSet(std::move(s));
}

/// Float-mode support: W_i below 1e-12 / q_i counts as zero.
inline SupportSet support_of(const Profile<double>& W, const std::vector<double>& q)
{
    std::vector<int> s;
    for (std::size_t i = 0; i < W.size(); ++i)
        if (W[i] >= kZeroThreshold / q[i]) s.push_back(static_cast<int>(i));
    return SupportSet(std::move(s));
}

/// W^k with 0^0 = 1.
template <class T>
T monomial_value(const Profile<T>& W, const CountVector& k)
{
    if (static_cast<int>(W.size()) != k.size()) throw std::invalid_argument("monomial_value: dimension mismatch");
    T v = 1;
    for (std::size_t i = 0; i < W.size(); ++i) {
        int e = k.k[i];
        if (e == 0) continue;
        if (W[i] == 0) return T(0);
        if constexpr (std::is_same_v<T, Rational>)
            v *= pow(W[i], static_cast<unsigned>(e));
        else
            v *= std::pow(W[i], e);
    }
    return v;
}

/// log W^k, or -infinity when a zero coordinate carries a positive exponent.
inline double log_monomial(const Profile<double>& W, const CountVector& k)
{
    double s = 0;
    for (std::size_t i = 0; i < W.size(); ++i) {
        int e = k.k[i];
        if (e == 0) continue;
        if (W[i] <= 0) return -std::numeric_limits<double>::infinity();
        s += e * std::log(W[i]);
    }
    return s;
}

inline RatioPoint to_ratio(const Profile<double>& W, const SupportSet& S)
{
    RatioPoint zp{S, {}};
    double wr = W[static_cast<std::size_t>(S.anchor())];
    if (!(wr > 0)) throw std::invalid_argument("to_ratio: anchor coordinate must be positive");
    for (int i : S.free_indices()) {
        double wi = W[static_cast<std::size_t>(i)];
        if (!(wi > 0)) throw std::invalid_argument("to_ratio: support coordinate must be positive");
        zp.z.push_back(std::log(wi / wr));
    }
    return zp;
}

inline RatioPoint to_ratio(const Profile<double>& W, const std::vector<double>& q)
{
    return to_ratio(W, support_of(W, q));
}

/// Inverse chart: W_anchor = 1 / (q_anchor + sum q_i e^{z_i}), W_i = e^{z_i} W_anchor, zero off S.
inline Profile<double> from_ratio(const RatioPoint& zp, const std::vector<double>& q)
{
    const auto free = zp.S.free_indices();
    if (zp.z.size() != free.size()) throw std::invalid_argument("from_ratio: coordinate count mismatch");
    std::vector<double> z(zp.z);
    for (double& v : z) {
        if (!std::isfinite(v)) throw std::invalid_argument("from_ratio: non-finite coordinate");
        v = std::clamp(v, -kRatioClamp, kRatioClamp);
    }
    // Scale by the largest exponent so nothing overflows.
    double top = 0;
    for (double v : z) top = std::max(top, v);
    double denom = q[static_cast<std::size_t>(zp.S.anchor())] * std::exp(-top);
    for (std::size_t j = 0; j < free.size(); ++j) denom += q[static_cast<std::size_t>(free[j])] * std::exp(z[j] - top);
    Profile<double> W(q.size(), 0.0);
    W[static_cast<std::size_t>(zp.S.anchor())] = std::exp(-top) / denom;
    for (std::size_t j = 0; j < free.size(); ++j) W[static_cast<std::size_t>(free[j])] = std::exp(z[j] - top) / denom;
    return W;
}

/// Exact profile from rational wealth ratios rho_i = W_i / W_anchor (one per free index of S).
inline Profile<Rational> from_ratios_exact(const SupportSet& S, const std::vector<Rational>& rho,
                                           const std::vector<Rational>& q)
{
    const auto free = S.free_indices();
    if (rho.size() != free.size()) throw std::invalid_argument("from_ratios_exact: coordinate count mismatch");
    Rational denom = q[static_cast<std::size_t>(S.anchor())];
    for (std::size_t j = 0; j < free.size(); ++j) {
        if (rho[j] <= 0) throw std::invalid_argument("from_ratios_exact: ratios must be positive");
        denom += q[static_cast<std::size_t>(free[j])] * rho[j];
    }
    Profile<Rational> W(q.size(), Rational(0));
    Rational wr = 1 / denom;
    W[static_cast<std::size_t>(S.anchor())] = wr;
    for (std::size_t j = 0; j < free.size(); ++j) W[static_cast<std::size_t>(free[j])] = rho[j] * wr;
    return W;
}

/// The unique point of S with all coordinates equal (z = 0).
template <class T>
Profile<T> equal_wealth_point(const SupportSet& S, const std::vector<T>& q)
{
    T denom = 0;
    for (int i : S.idx) denom += q[static_cast<std::size_t>(i)];
    Profile<T> W(q.size(), T(0));
    for (int i : S.idx) W[static_cast<std::size_t>(i)] = T(1) / denom;
    return W;
}

} // namespace qkelly

#endif // QKELLY_WEALTH_GEOMETRY_HPP
