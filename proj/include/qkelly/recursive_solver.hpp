#ifndef QKELLY_RECURSIVE_SOLVER_HPP
#define QKELLY_RECURSIVE_SOLVER_HPP

#include "arrangement.hpp"
#include "parallel.hpp"
#include "problem_model.hpp"
#include "quantile_eval.hpp"
#include "rational.hpp"
#include "shadow_kelly.hpp"
#include "stratum_solver.hpp"
#include "wealth_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qkelly {

/// Halfspaces a.W <= b intersected with the simplex; empty means the whole simplex.
struct RestrictedFamily {
    std::vector<WealthHalfspace> halfspaces;
    bool empty() const { return halfspaces.empty(); }
};

enum class VisitStatus { PrunedZero, PointEvaluation, InteriorMax, OnClosureBoundary, SupportCollapse, Infeasible };

inline const char* visit_status_name(VisitStatus s)
{
    switch (s) {
    case VisitStatus::PrunedZero: return "PrunedZero";
    case VisitStatus::PointEvaluation: return "PointEvaluation";
    case VisitStatus::InteriorMax: return "InteriorMax";
    case VisitStatus::OnClosureBoundary: return "OnClosureBoundary";
    case VisitStatus::SupportCollapse: return "SupportCollapse";
    case VisitStatus::Infeasible: return "Infeasible";
    }
    return "?";
}

struct TraceRecord {
    int stratum = -1;
    std::pair<int, int> rank;
    std::string label;
    std::optional<CountVector> active; // empty for zero strata
    VisitStatus status = VisitStatus::PrunedZero;
    bool candidate = false;
    double value = 0;
    std::optional<Rational> exact_value;
    std::optional<int> landing;
    bool closed_form = false;
    int iterations = 0;
    double kkt_residual = 0;
    // Wealth point behind the value (candidates only).
    Profile<double> point;
    std::optional<Profile<Rational>> exact_point;
    // Support coordinates where the shadow point of the active count violates the face (1-based),
    // kept for pruning experiments.
    std::vector<int> shadow_violations;
};

struct DescentTrace {
    std::vector<TraceRecord> visited;
    int pruned_zero = 0;
    std::vector<std::pair<int, int>> descent_edges;
    std::vector<int> winning_path;
};

struct GlobalSolution {
    double value = 0;
    std::optional<Rational> exact_value;
    Profile<double> argmax;
    std::optional<Profile<Rational>> argmax_exact;
    CountVector active_count;
    Stratum attained_stratum;
    DescentTrace trace;
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, DescentTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
    const DescentTrace& trace() const { return trace_; }

private:
    DescentTrace trace_;
};

class InfeasibleFamily : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline bool family_contains(const RestrictedFamily& fam, const Profile<Rational>& W)
{
    for (const auto& h : fam.halfspaces) {
        Rational s = 0;
        for (std::size_t i = 0; i < W.size(); ++i) s += h.a[i] * W[i];
        if (s > h.b) return false;
    }
    return true;
}

inline bool family_contains(const RestrictedFamily& fam, const Profile<double>& W, double tol = 1e-12)
{
    for (const auto& h : fam.halfspaces) {
        double s = 0, mag = std::abs(to_double(h.b));
        for (std::size_t i = 0; i < W.size(); ++i) {
            s += to_double(h.a[i]) * W[i];
            mag += std::abs(to_double(h.a[i]) * W[i]);
        }
        if (s > to_double(h.b) + tol * std::max(1.0, mag)) return false;
    }
    return true;
}

// Strict ordering of candidate values: exact when both sides are exact, else 1e-12 relative.
inline int compare_values(double a, const std::optional<Rational>& ea, double b, const std::optional<Rational>& eb)
{
    if (ea && eb) return *ea > *eb ? 1 : (*ea < *eb ? -1 : 0);
    double tol = 1e-12 * std::max({1e-300, std::abs(a), std::abs(b)});
    if (a > b + tol) return 1;
    if (a < b - tol) return -1;
    return 0;
}

inline SignVector boundary_landing(const FaceLattice& lat, const Stratum& st, const std::vector<int>& tight)
{
    SignVector g = st.signs;
    std::vector<int> ineq_to_normal;
    for (std::size_t j = 0; j < st.signs.size(); ++j)
        if (st.signs[j] != 0) ineq_to_normal.push_back(static_cast<int>(j));
    for (int t : tight) g[static_cast<std::size_t>(ineq_to_normal[static_cast<std::size_t>(t)])] = 0;
    if (lat.find(g)) return g;
    // Forcing the tight rows to zero can force further zeros; take the largest closure face that does.
    for (const auto& f : lat.strata) {
        if (!conforms(f.signs, st.signs)) continue;
        bool ok = true;
        for (std::size_t j = 0; j < g.size() && ok; ++j)
            if (g[j] == 0 && f.signs[j] != 0) ok = false;
        if (ok) return f.signs;
    }
    return SignVector(st.signs.size(), 0);
}

inline std::vector<int> shadow_violations(const FaceLattice& lat, const Stratum& st, const CountVector& k,
                                          const std::vector<Rational>& q)
{
    std::vector<int> out;
    for (int i : st.S.idx)
        if (k[i] == 0) out.push_back(i + 1);
    if (!out.empty() || k.support() != st.S) return out;
    auto W = shadow_point(k, k.n, q);
    auto s = signs_of_profile(lat.arr, W);
    for (std::size_t j = 0; j < s.size(); ++j)
        if (s[j] != st.signs[j]) out.push_back(-static_cast<int>(j) - 1);
    return out;
}

} // namespace detail

struct SolveSettings {
    SolverOptions solver;
    std::size_t threads = 0; // 0 means worker_count()
};

/// Reports the count of the attaining tier whose shadow-Kelly point is the argmax, if any;
/// otherwise the stratum's active count.
inline CountVector reported_active_count(const ProblemInstance& inst, const CountTable& table, const FaceLattice& lat,
                                         const Stratum& st, const CountVector& active,
                                         const std::optional<Profile<Rational>>& exact_argmax,
                                         const Profile<double>& argmax)
{
    auto oc = stratum_ordering(table, lat, st);
    for (const auto& tier : oc.tiers) {
        bool has_active = false;
        for (int i : tier)
            if (table.counts[static_cast<std::size_t>(i)] == active) has_active = true;
        if (!has_active) continue;
        for (int i : tier) {
            const auto& k = table.counts[static_cast<std::size_t>(i)];
            if (exact_argmax) {
                if (shadow_point(k, inst.n, inst.q) == *exact_argmax) return k;
            } else {
                auto sp = shadow_point(k, inst.n, inst.q_double());
                bool same = true;
                for (std::size_t c = 0; c < sp.size(); ++c)
                    if (std::abs(sp[c] - argmax[c]) > 1e-12 * std::max(1.0, std::abs(sp[c]))) same = false;
                if (same) return k;
            }
        }
    }
    return active;
}

/// Exhaustive rank-ordered sweep over all strata. Zero strata are skipped, zero-dimensional
/// strata are evaluated at their unique point, every other nonzero stratum is solved on its
/// closure, and only interior maximizers and point evaluations become candidates.
/// With a restricted family every feasible stratum solve is a candidate valued by quantile_at.
inline GlobalSolution solve(const ProblemInstance& inst, const RestrictedFamily& family = {},
                            const SolveSettings& settings = {})
{
    const std::size_t threads = settings.threads ? settings.threads : worker_count();
    auto pfor = [threads](std::size_t n, auto&& fn) { parallel_for(n, fn, threads); };
    for (const auto& h : family.halfspaces)
        if (static_cast<int>(h.a.size()) != inst.m) throw std::invalid_argument("halfspace dimension mismatch");

    const CountTable table = count_table(inst);
    const Atlas atlas = build_atlas(table.counts, inst.m, pfor);
    const auto q = inst.q_double();
    const bool restricted = !family.empty();

    std::vector<Rational> support_masses(atlas.lattices.size());
    for (std::size_t l = 0; l < atlas.lattices.size(); ++l)
        support_masses[l] = support_mass(inst, atlas.lattices[l].arr.S);

    DescentTrace trace;
    trace.visited.resize(atlas.strata.size());
    std::vector<std::string> failure(atlas.strata.size());
    pfor(atlas.strata.size(), [&](std::size_t id) {
        const Stratum& st = atlas.strata[id];
        const FaceLattice& lat = atlas.lattice_of(st);
        TraceRecord rec;
        rec.stratum = st.id;
        rec.rank = st.rank();
        rec.label = st.label();
        if (support_masses[static_cast<std::size_t>(st.lattice)] < inst.alpha) {
            rec.status = VisitStatus::PrunedZero;
            trace.visited[id] = std::move(rec);
            return;
        }
        ActiveCount ac = active_count(inst, table, lat, st);
        rec.active = ac.k;
        rec.shadow_violations = detail::shadow_violations(lat, st, ac.k, inst.q);
        try {
            if (st.dim == 0) {
                auto W = equal_wealth_point(st.S, inst.q);
                if (restricted && !detail::family_contains(family, W)) {
                    rec.status = VisitStatus::Infeasible;
                } else {
                    rec.status = VisitStatus::PointEvaluation;
                    rec.candidate = true;
                    rec.exact_value = quantile_at(inst, table, W);
                    rec.value = to_double(*rec.exact_value);
                    rec.exact_point = W;
                    rec.point = to_double(W);
                }
                trace.visited[id] = std::move(rec);
                return;
            }
            StratumObjective obj{ac.k, st.S, inst.q, inst.n};
            auto poly = face_polyhedron(lat, st, family.halfspaces);
            auto start = interior_point(lat, st);
            std::vector<std::vector<double>> rays;
            if (restricted)
                for (int r : closure_rays(lat, st)) {
                    std::vector<double> v;
                    double top = 0;
                    for (Int x : lat.rays[static_cast<std::size_t>(r)]) top = std::max(top, std::abs(static_cast<double>(x)));
                    for (Int x : lat.rays[static_cast<std::size_t>(r)]) v.push_back(static_cast<double>(x) / top);
                    rays.push_back(std::move(v));
                }
            SolverOptions opt = settings.solver;
            opt.seed ^= static_cast<std::uint64_t>(st.id) * 0x2545f4914f6cdd1dULL;
            SolveOutcome out = maximize_on_face(obj, poly, start, opt, rays);
            rec.iterations = out.iterations;
            rec.kkt_residual = out.kkt_residual;
            rec.closed_form = out.closed_form;
            switch (out.status) {
            case SolveStatus::InteriorMax: rec.status = VisitStatus::InteriorMax; break;
            case SolveStatus::OnClosureBoundary: rec.status = VisitStatus::OnClosureBoundary; break;
            case SolveStatus::SupportCollapse: rec.status = VisitStatus::SupportCollapse; break;
            case SolveStatus::Infeasible: rec.status = VisitStatus::Infeasible; break;
            }
            if (out.status == SolveStatus::Infeasible) {
                trace.visited[id] = std::move(rec);
                return;
            }
            if (out.exact_point) {
                rec.exact_point = out.exact_point;
                rec.point = to_double(*out.exact_point);
            } else if (out.status != SolveStatus::SupportCollapse) {
                rec.point = from_ratio(RatioPoint{st.S, out.z}, q);
            }
            if (restricted) {
                rec.candidate = out.status != SolveStatus::SupportCollapse;
                if (rec.candidate) rec.value = quantile_at(inst, table, rec.point);
            } else {
                rec.candidate = out.status == SolveStatus::InteriorMax;
                rec.value = out.value;
                rec.exact_value = out.exact_value;
            }
            if (out.status == SolveStatus::OnClosureBoundary && !out.tight.empty()) {
                auto g = detail::boundary_landing(lat, st, out.tight);
                if (auto f = lat.find(g)) rec.landing = atlas.global_id(st.lattice, *f);
            } else if (out.status == SolveStatus::SupportCollapse) {
                auto li = atlas.lattice_index(out.collapse_to);
                const auto& clat = atlas.lattices[static_cast<std::size_t>(*li)];
                if (auto f = clat.find(inherited_signs(lat, st, clat))) rec.landing = atlas.global_id(*li, *f);
            }
        } catch (const std::exception& e) {
            failure[id] = st.label() + ": " + e.what();
        }
        trace.visited[id] = std::move(rec);
    });
    for (std::size_t id = 0; id < failure.size(); ++id)
        if (!failure[id].empty()) throw SolveError("numerical failure on stratum " + failure[id], trace);

    int best = -1;
    for (const auto& rec : trace.visited) {
        if (rec.status == VisitStatus::PrunedZero) ++trace.pruned_zero;
        if (rec.landing) trace.descent_edges.emplace_back(rec.stratum, *rec.landing);
        if (!rec.candidate) continue;
        if (best < 0) {
            best = rec.stratum;
            continue;
        }
        const auto& cur = trace.visited[static_cast<std::size_t>(best)];
        int c = detail::compare_values(rec.value, rec.exact_value, cur.value, cur.exact_value);
        if (c > 0 || (c == 0 && rec.rank < cur.rank)) best = rec.stratum;
    }
    if (best < 0) {
        if (restricted) throw InfeasibleFamily("restricted family has no feasible point on any nonzero stratum");
        throw SolveError("no stratum produced a candidate", trace);
    }

    // Descent path from the stratum holding the Kelly point.
    {
        int cur = atlas.locate(kelly_point(inst.p, inst.q));
        std::vector<bool> seen(atlas.strata.size(), false);
        while (cur >= 0 && !seen[static_cast<std::size_t>(cur)]) {
            seen[static_cast<std::size_t>(cur)] = true;
            trace.winning_path.push_back(cur);
            const auto& rec = trace.visited[static_cast<std::size_t>(cur)];
            cur = rec.landing ? *rec.landing : -1;
        }
    }

    const auto& win = trace.visited[static_cast<std::size_t>(best)];
    GlobalSolution sol;
    sol.value = win.value;
    sol.exact_value = win.exact_value;
    sol.argmax = win.point;
    sol.argmax_exact = win.exact_point;
    sol.attained_stratum = atlas.strata[static_cast<std::size_t>(best)];
    sol.active_count = reported_active_count(inst, table, atlas.lattice_of(sol.attained_stratum), sol.attained_stratum,
                                             *win.active, sol.argmax_exact, sol.argmax);
    sol.trace = std::move(trace);
    return sol;
}

/// Binary closed form: per chamber the shadow point of the count (m_alpha, n - m_alpha), where
/// m_alpha is the largest j with P(B_n >= j) >= alpha, kept only when it lies in its chamber;
/// then the wall U = D and the two vertices.
inline GlobalSolution solve_binary_fast(const ProblemInstance& inst)
{
    if (inst.m != 2) throw std::invalid_argument("solve_binary_fast requires m = 2");
    const int n = inst.n;
    const CountTable table = count_table(inst);
    const Atlas atlas = build_atlas(table.counts, 2);

    struct Cand {
        Rational value;
        Profile<Rational> W;
        int stratum;
        CountVector k;
    };
    std::vector<Cand> cands;
    // Chamber U > D orders monomials by the number of first outcomes, U < D by the second.
    for (int first : {0, 1}) {
        const int other = 1 - first;
        int m_alpha = -1;
        Rational tail = 0;
        for (int j = n; j >= 0; --j) {
            std::vector<int> kk(2);
            kk[static_cast<std::size_t>(first)] = j;
            kk[static_cast<std::size_t>(other)] = n - j;
            tail += multinomial_mass(inst, CountVector(kk));
            if (tail >= inst.alpha) {
                m_alpha = j;
                break;
            }
        }
        std::vector<int> kk(2);
        kk[static_cast<std::size_t>(first)] = m_alpha;
        kk[static_cast<std::size_t>(other)] = n - m_alpha;
        CountVector k(kk);
        auto W = shadow_point(k, n, inst.q);
        if (W[static_cast<std::size_t>(first)] > W[static_cast<std::size_t>(other)] && W[static_cast<std::size_t>(other)] > 0)
            cands.push_back({shadow_value(k, n, inst.q), W, atlas.locate(W), k});
    }
    SupportSet full = SupportSet::full(2);
    {
        auto W = equal_wealth_point(full, inst.q);
        int id = atlas.locate(W);
        const auto& st = atlas.strata[static_cast<std::size_t>(id)];
        auto ac = active_count(inst, table, atlas.lattice_of(st), st);
        cands.push_back({pow(W[0], static_cast<unsigned>(n)), W, id, ac.k});
    }
    for (int i : {0, 1}) {
        if (pow(inst.p[static_cast<std::size_t>(i)], static_cast<unsigned>(n)) < inst.alpha) continue;
        Profile<Rational> W(2, Rational(0));
        W[static_cast<std::size_t>(i)] = 1 / inst.q[static_cast<std::size_t>(i)];
        std::vector<int> kk(2, 0);
        kk[static_cast<std::size_t>(i)] = n;
        cands.push_back({pow(W[static_cast<std::size_t>(i)], static_cast<unsigned>(n)), W, atlas.locate(W), CountVector(kk)});
    }
    const Cand* best = nullptr;
    for (const auto& c : cands) {
        if (!best || c.value > best->value) {
            best = &c;
            continue;
        }
        if (c.value == best->value) {
            auto rc = atlas.strata[static_cast<std::size_t>(c.stratum)].rank();
            auto rb = atlas.strata[static_cast<std::size_t>(best->stratum)].rank();
            if (rc < rb || (rc == rb && c.stratum < best->stratum)) best = &c;
        }
    }
    GlobalSolution sol;
    sol.exact_value = best->value;
    sol.value = to_double(best->value);
    sol.argmax_exact = best->W;
    sol.argmax = to_double(best->W);
    sol.attained_stratum = atlas.strata[static_cast<std::size_t>(best->stratum)];
    sol.active_count = reported_active_count(inst, table, atlas.lattice_of(sol.attained_stratum), sol.attained_stratum,
                                             best->k, sol.argmax_exact, sol.argmax);
    return sol;
}

/// Plain-text rendering of the trace: one line per stratum, then the descent path.
inline std::string descent_trace(const GlobalSolution& sol)
{
    std::ostringstream os;
    const auto& tr = sol.trace;
    os << "strata visited: " << tr.visited.size() << ", pruned zero: " << tr.pruned_zero << "\n";
    for (const auto& r : tr.visited) {
        os << "#" << r.stratum << " " << r.label << " rank (" << r.rank.first << "," << r.rank.second << ") ";
        if (r.status == VisitStatus::PrunedZero) {
            os << "[pruned] Zero\n";
            continue;
        }
        os << "k=" << r.active->to_string() << " " << visit_status_name(r.status);
        if (r.candidate) {
            os << " value=" << r.value;
            if (r.exact_value) os << " (" << to_string(*r.exact_value) << ")";
        }
        if (r.landing) os << " -> #" << *r.landing;
        os << "\n";
    }
    os << "descent from Kelly stratum:";
    for (std::size_t i = 0; i < tr.winning_path.size(); ++i) {
        int id = tr.winning_path[i];
        os << (i ? " -> " : " ") << tr.visited[static_cast<std::size_t>(id)].label;
    }
    os << "\nattained on " << sol.attained_stratum.label() << " value " << sol.value;
    if (sol.exact_value) os << " (" << to_string(*sol.exact_value) << ")";
    os << "\n";
    return os.str();
}

} // namespace qkelly

#endif // QKELLY_RECURSIVE_SOLVER_HPP
