#ifndef QKELLY_QUANTILE_EVAL_HPP
#define QKELLY_QUANTILE_EVAL_HPP

#include "arrangement.hpp"
#include "problem_model.hpp"
#include "rational.hpp"
#include "wealth_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace qkelly {

inline constexpr double kTieTolerance = 1e-12;

/// Upper quantile at a point together with the tier representative that attains it.
template <class T>
struct PointQuantile {
    T value{};
    int representative = -1; // index into the count table; -1 when the quantile is 0
};

namespace detail {

// Walks tiers of equal value in descending order and returns the first one whose
// cumulative mass reaches alpha. Mass is summed in double and re-summed exactly only
// when the double sum sits within 1e-9 of alpha.
template <class Equal>
PointQuantile<int> walk_tiers(const ProblemInstance& inst, const CountTable& table, const std::vector<int>& order,
                              const std::vector<bool>& positive, Equal&& equal)
{
    const double alpha_d = inst.alpha_double();
    double cum_d = 0;
    Rational cum = 0;
    bool exact_tracking = false;
    std::size_t i = 0;
    while (i < order.size()) {
        if (!positive[static_cast<std::size_t>(order[i])]) break;
        std::size_t j = i;
        int rep = order[i];
        while (j < order.size() && positive[static_cast<std::size_t>(order[j])] && equal(order[i], order[j])) {
            rep = std::min(rep, order[j]);
            cum_d += table.mass_double[static_cast<std::size_t>(order[j])];
            ++j;
        }
        bool reached;
        if (!exact_tracking && std::abs(cum_d - alpha_d) > 1e-9) {
            reached = cum_d >= alpha_d;
        } else {
            if (!exact_tracking) {
                cum = 0;
                for (std::size_t t = 0; t < j; ++t) cum += table.mass[static_cast<std::size_t>(order[t])];
                exact_tracking = true;
            } else {
                for (std::size_t t = i; t < j; ++t) cum += table.mass[static_cast<std::size_t>(order[t])];
            }
            reached = cum >= inst.alpha;
        }
        if (reached) return {0, rep};
        i = j;
    }
    return {0, -1};
}

} // namespace detail

inline PointQuantile<double> quantile_detail(const ProblemInstance& inst, const CountTable& table,
                                             const Profile<double>& W)
{
    std::vector<double> lv(table.size());
    std::vector<bool> positive(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        lv[i] = log_monomial(W, table.counts[i]);
        positive[i] = std::isfinite(lv[i]);
    }
    std::vector<int> order(table.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return lv[static_cast<std::size_t>(a)] > lv[static_cast<std::size_t>(b)];
    });
    auto tied = [&](int a, int b) {
        double x = lv[static_cast<std::size_t>(a)], y = lv[static_cast<std::size_t>(b)];
        return std::abs(x - y) <= kTieTolerance * std::max(1.0, std::abs(x));
    };
    auto hit = detail::walk_tiers(inst, table, order, positive, tied);
    if (hit.representative < 0) return {0.0, -1};
    return {monomial_value(W, table.counts[static_cast<std::size_t>(hit.representative)]), hit.representative};
}

inline PointQuantile<Rational> quantile_detail(const ProblemInstance& inst, const CountTable& table,
                                               const Profile<Rational>& W)
{
    std::vector<Rational> val(table.size());
    std::vector<bool> positive(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        val[i] = monomial_value(W, table.counts[i]);
        positive[i] = val[i] > 0;
    }
    std::vector<int> order(table.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return val[static_cast<std::size_t>(a)] > val[static_cast<std::size_t>(b)];
    });
    auto tied = [&](int a, int b) { return val[static_cast<std::size_t>(a)] == val[static_cast<std::size_t>(b)]; };
    auto hit = detail::walk_tiers(inst, table, order, positive, tied);
    if (hit.representative < 0) return {Rational(0), -1};
    return {val[static_cast<std::size_t>(hit.representative)], hit.representative};
}

/// Upper alpha-quantile of terminal wealth W^N: the largest atom v with P(W^N >= v) >= alpha.
template <class T>
T quantile_at(const ProblemInstance& inst, const CountTable& table, const Profile<T>& W)
{
    return quantile_detail(inst, table, W).value;
}

template <class T>
T quantile_at(const ProblemInstance& inst, const Profile<T>& W)
{
    return quantile_at(inst, count_table(inst), W);
}

/// Tiers of tied count vectors, strictly decreasing in value on a stratum.
struct OrderedCounts {
    std::vector<std::vector<int>> tiers; // indices into the count table
    std::vector<Rational> cum_mass;
};

/// Sign of (W^a - W^b) on the stratum, read off the sign vector.
inline int compare_on_stratum(const FaceLattice& lat, const Stratum& st, const CountVector& a, const CountVector& b)
{
    IntVec d = projected_difference(a, b, st.S);
    if (is_zero(d)) return 0;
    auto [cls, orient] = lat.arr.classify(std::move(d));
    return orient * st.signs[static_cast<std::size_t>(cls)];
}

inline OrderedCounts stratum_ordering(const CountTable& table, const FaceLattice& lat, const Stratum& st)
{
    std::vector<int> inside;
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table.counts[i].supported_in(st.S)) inside.push_back(static_cast<int>(i));
    auto cmp = [&](int a, int b) {
        return compare_on_stratum(lat, st, table.counts[static_cast<std::size_t>(a)],
                                  table.counts[static_cast<std::size_t>(b)]);
    };
    std::stable_sort(inside.begin(), inside.end(), [&](int a, int b) { return cmp(a, b) > 0; });
    OrderedCounts oc;
    Rational cum = 0;
    for (std::size_t i = 0; i < inside.size();) {
        std::vector<int> tier;
        std::size_t j = i;
        while (j < inside.size() && cmp(inside[i], inside[j]) == 0) {
            tier.push_back(inside[j]);
            cum += table.mass[static_cast<std::size_t>(inside[j])];
            ++j;
        }
        oc.tiers.push_back(std::move(tier));
        oc.cum_mass.push_back(cum);
        i = j;
    }
    return oc;
}

struct ActiveCount {
    bool zero = true;
    int index = -1; // into the count table
    CountVector k;
};

/// The count whose monomial equals the quantile on the stratum, or Zero when Pi_S < alpha.
/// Within the attaining tier the lexicographically largest count is reported.
inline ActiveCount active_count(const ProblemInstance& inst, const CountTable& table, const FaceLattice& lat,
                                const Stratum& st)
{
    ActiveCount ac;
    if (support_mass(inst, st.S) < inst.alpha) return ac;
    auto oc = stratum_ordering(table, lat, st);
    for (std::size_t t = 0; t < oc.tiers.size(); ++t) {
        if (oc.cum_mass[t] >= inst.alpha) {
            int rep = *std::min_element(oc.tiers[t].begin(), oc.tiers[t].end(), [&](int a, int b) {
                return table.counts[static_cast<std::size_t>(a)] > table.counts[static_cast<std::size_t>(b)];
            });
            ac.zero = false;
            ac.index = rep;
            ac.k = table.counts[static_cast<std::size_t>(rep)];
            return ac;
        }
    }
    throw std::logic_error("support mass reaches alpha but no tier does");
}

} // namespace qkelly

#endif // QKELLY_QUANTILE_EVAL_HPP
