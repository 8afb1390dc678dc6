#ifndef QKELLY_VERIFICATION_HPP
#define QKELLY_VERIFICATION_HPP

#include "parallel.hpp"
#include "problem_model.hpp"
#include "quantile_eval.hpp"
#include "rational.hpp"
#include "recursive_solver.hpp"
#include "shadow_kelly.hpp"
#include "wealth_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace qkelly {

struct GridReport {
    int resolution = 0;
    double best_value = 0;
    Profile<double> best_point;
    std::vector<int> best_node; // lattice coordinates j with W_i = j_i / (R q_i)
    std::size_t evaluations = 0;
};

namespace detail {

// All compositions of R into m nonnegative parts, in lexicographic order.
inline void for_each_composition(int m, int R, const std::function<void(const std::vector<int>&)>& fn)
{
    std::vector<int> j(static_cast<std::size_t>(m), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == m - 1) {
            j[static_cast<std::size_t>(pos)] = left;
            fn(j);
            return;
        }
        for (int v = left; v >= 0; --v) {
            j[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, R);
}

inline Profile<double> grid_point(const std::vector<int>& j, int R, const std::vector<double>& q)
{
    Profile<double> W(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) W[i] = j[i] / (R * q[i]);
    return W;
}

} // namespace detail

/// Brute-force maximum of the quantile over the lattice W_i = j_i / (R q_i), sum j = R,
/// which contains every support face. An optional family keeps only nodes inside it.
inline GridReport grid_oracle(const ProblemInstance& inst, int resolution, const RestrictedFamily& family = {},
                              std::size_t threads = 0)
{
    if (inst.m > 4) throw std::invalid_argument("grid_oracle: m must be at most 4");
    if (resolution < 10) throw std::invalid_argument("grid_oracle: resolution must be at least 10");
    const CountTable table = count_table(inst);
    const auto q = inst.q_double();
    const int R = resolution;

    // Split on the first coordinate so each worker owns a slab of the lattice.
    struct Slab {
        double value = -1;
        std::vector<int> node;
        std::size_t evaluations = 0;
    };
    std::vector<Slab> slabs(static_cast<std::size_t>(R + 1));
    parallel_for(
        static_cast<std::size_t>(R + 1),
        [&](std::size_t s) {
            const int first = R - static_cast<int>(s);
            Slab& slab = slabs[s];
            auto visit = [&](const std::vector<int>& rest) {
                std::vector<int> j{first};
                j.insert(j.end(), rest.begin(), rest.end());
                auto W = detail::grid_point(j, R, q);
                if (!family.empty() && !detail::family_contains(family, W)) return;
                ++slab.evaluations;
                double v = quantile_at(inst, table, W);
                if (v > slab.value) {
                    slab.value = v;
                    slab.node = j;
                }
            };
            if (inst.m == 1)
                visit({});
            else
                detail::for_each_composition(inst.m - 1, R - first, visit);
        },
        threads ? threads : worker_count());

    GridReport rep;
    rep.resolution = R;
    rep.best_value = -1;
    for (const auto& s : slabs) {
        rep.evaluations += s.evaluations;
        if (s.value > rep.best_value) {
            rep.best_value = s.value;
            rep.best_node = s.node;
        }
    }
    if (rep.best_node.empty()) throw std::invalid_argument("grid_oracle: no lattice node satisfies the family");
    rep.best_point = detail::grid_point(rep.best_node, R, q);
    return rep;
}

namespace detail {

// Counter-based stream: the draw for (sample, trial) depends only on the seed and the counter.
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter)
{
    std::uint64_t state = seed ^ (counter * 0xd1b54a32d192ed03ULL);
    splitmix64(state);
    return uniform01(state);
}

} // namespace detail

/// Empirical law of the count vector over `samples` simulated horizons, as a count table.
inline CountTable mc_count_table(const ProblemInstance& inst, std::size_t samples, std::uint64_t seed,
                                 std::size_t threads = 0)
{
    if (samples < 1000) throw std::invalid_argument("mc_quantile: at least 1000 samples required");
    CountTable table = count_table(inst);
    std::vector<double> cum;
    double acc = 0;
    for (double v : inst.p_double()) cum.push_back(acc += v);
    cum.back() = 1.0;

    // Map a count vector to its table index through a mixed-radix key.
    const int base = inst.n + 1;
    auto key_of = [&](const std::vector<int>& k) {
        std::size_t key = 0;
        for (int v : k) key = key * static_cast<std::size_t>(base) + static_cast<std::size_t>(v);
        return key;
    };
    std::size_t key_space = 1;
    for (int i = 0; i < inst.m; ++i) key_space *= static_cast<std::size_t>(base);
    std::vector<int> index_of(key_space, -1);
    for (std::size_t i = 0; i < table.size(); ++i) index_of[key_of(table.counts[i].k)] = static_cast<int>(i);

    const std::size_t blocks = 64;
    std::vector<std::vector<std::uint64_t>> hist(blocks, std::vector<std::uint64_t>(table.size(), 0));
    parallel_for(
        blocks,
        [&](std::size_t b) {
            std::vector<int> k(static_cast<std::size_t>(inst.m));
            for (std::size_t s = b; s < samples; s += blocks) {
                std::fill(k.begin(), k.end(), 0);
                for (int t = 0; t < inst.n; ++t) {
                    double u = detail::counter_uniform(seed, s * static_cast<std::uint64_t>(inst.n) + static_cast<std::uint64_t>(t));
                    auto it = std::upper_bound(cum.begin(), cum.end(), u);
                    std::size_t o = std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
                    ++k[o];
                }
                ++hist[b][static_cast<std::size_t>(index_of[key_of(k)])];
            }
        },
        threads ? threads : worker_count());

    for (std::size_t i = 0; i < table.size(); ++i) {
        std::uint64_t c = 0;
        for (const auto& h : hist) c += h[i];
        table.mass[i] = Rational(BigInt(c), BigInt(samples));
        table.mass_double[i] = static_cast<double>(c) / static_cast<double>(samples);
    }
    return table;
}

/// Empirical upper alpha-quantile of simulated terminal wealth: the largest observed value v
/// with empirical P(X >= v) >= alpha. Deterministic given the seed.
template <class T>
T mc_quantile(const ProblemInstance& inst, const Profile<T>& W, std::size_t samples, std::uint64_t seed,
              std::size_t threads = 0)
{
    return quantile_at(inst, mc_count_table(inst, samples, seed, threads), W);
}

struct SweepRow {
    int n = 0;
    double scaled_log_value = 0;
    Profile<double> argmax;
    double kelly_distance = 0;
};

inline void check_sweep_guard(int m, const std::vector<int>& horizons)
{
    if (m > 3) throw std::invalid_argument("asymptotic_sweep: m must be at most 3");
    const int cap = m == 2 ? 40 : 12;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] < 1) throw std::invalid_argument("asymptotic_sweep: horizons must be positive");
        if (horizons[i] > cap)
            throw std::invalid_argument("asymptotic_sweep: horizon " + std::to_string(horizons[i]) + " exceeds " +
                                        std::to_string(cap) + " for m = " + std::to_string(m));
        if (i && horizons[i] <= horizons[i - 1]) throw std::invalid_argument("asymptotic_sweep: horizons must ascend");
    }
}

/// Exact optimum per horizon, with (1/n) log of the value and the sup-distance to p/q.
inline std::vector<SweepRow> asymptotic_sweep(const std::vector<Rational>& p, const std::vector<Rational>& q,
                                              const Rational& alpha, const std::vector<int>& horizons,
                                              bool exact_mode = true)
{
    const int m = static_cast<int>(p.size());
    check_sweep_guard(m, horizons);
    const auto K = to_double(kelly_point(p, q));
    std::vector<SweepRow> rows;
    for (int n : horizons) {
        auto inst = validate_instance(m, p, q, n, alpha, exact_mode);
        auto sol = solve(inst);
        SweepRow r;
        r.n = n;
        r.scaled_log_value = std::log(sol.value) / n;
        r.argmax = sol.argmax;
        for (std::size_t i = 0; i < K.size(); ++i) r.kelly_distance = std::max(r.kelly_distance, std::abs(sol.argmax[i] - K[i]));
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace qkelly

#endif // QKELLY_VERIFICATION_HPP
