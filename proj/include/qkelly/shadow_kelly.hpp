#ifndef QKELLY_SHADOW_KELLY_HPP
#define QKELLY_SHADOW_KELLY_HPP

#include "problem_model.hpp"
#include "rational.hpp"
#include "wealth_geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qkelly {

/// Closed-form maximizer of W^k on the closed simplex, W_i = k_i / (n q_i).
template <class T>
Profile<T> shadow_point(const CountVector& k, int n, const std::vector<T>& q)
{
    if (k.n != n || k.size() != static_cast<int>(q.size())) throw std::invalid_argument("shadow_point: bad count vector");
    Profile<T> W(q.size(), T(0));
    for (std::size_t i = 0; i < q.size(); ++i)
        if (k.k[i] > 0) W[i] = T(k.k[i]) / (T(n) * q[i]);
    return W;
}

/// max W^k over the closed simplex, computed in log space.
inline double shadow_value(const CountVector& k, int n, const std::vector<double>& q)
{
    double s = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (k.k[i] > 0) s += k.k[i] * std::log(k.k[i] / (n * q[i]));
    return std::exp(s);
}

inline Rational shadow_value(const CountVector& k, int n, const std::vector<Rational>& q)
{
    Rational v = 1;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (k.k[i] > 0) v *= pow(Rational(k.k[i]) / (Rational(n) * q[i]), static_cast<unsigned>(k.k[i]));
    return v;
}

/// Empirical law k/n under which maximizing W^k is one-period Kelly.
inline std::vector<Rational> shadow_law(const CountVector& k)
{
    std::vector<Rational> law;
    for (int v : k.k) law.push_back(Rational(v, k.n));
    return law;
}

template <class T>
Profile<T> kelly_point(const std::vector<T>& p, const std::vector<T>& q)
{
    Profile<T> W;
    for (std::size_t i = 0; i < p.size(); ++i) W.push_back(p[i] / q[i]);
    return W;
}

/// L* = sum_i p_i log(p_i / q_i).
inline double kelly_value(const std::vector<double>& p, const std::vector<double>& q)
{
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
    return s;
}

inline double kelly_value(const std::vector<Rational>& p, const std::vector<Rational>& q)
{
    return kelly_value(to_double(p), to_double(q));
}

} // namespace qkelly

#endif // QKELLY_SHADOW_KELLY_HPP
