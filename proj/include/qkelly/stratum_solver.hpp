#ifndef QKELLY_STRATUM_SOLVER_HPP
#define QKELLY_STRATUM_SOLVER_HPP

#include "arrangement.hpp"
#include "exact_lp.hpp"
#include "integer_linalg.hpp"
#include "problem_model.hpp"
#include "rational.hpp"
#include "shadow_kelly.hpp"
#include "wealth_geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkelly {

/// psi(z) = log W(z)^k on the chart of S.
struct StratumObjective {
    CountVector k;
    SupportSet S;
    std::vector<Rational> q; // full length m
    int n = 0;

    std::vector<double> q_double() const { return to_double(q); }
};

/// Halfspace a.W <= b of the wealth simplex.
struct WealthHalfspace {
    std::vector<Rational> a;
    Rational b;
};

/// Closed face polyhedron: eq rows d.z = 0, ineq rows d.z >= 0 (already sign-flipped).
/// faces lists, for each face of the closure, the indices of ineq rows that vanish on it;
/// when empty the faces are recovered from subsets of the ineq rows.
struct FacePolyhedron {
    std::size_t dim = 0;
    std::vector<IntVec> eq_normals;
    std::vector<IntVec> ineq_normals;
    std::vector<std::vector<int>> faces;
    std::vector<WealthHalfspace> extra;
};

inline FacePolyhedron face_polyhedron(const FaceLattice& lat, const Stratum& st,
                                      const std::vector<WealthHalfspace>& extra = {})
{
    FacePolyhedron poly;
    poly.dim = lat.arr.dim;
    poly.extra = extra;
    std::vector<int> ineq_of(lat.arr.normals.size(), -1);
    for (std::size_t j = 0; j < lat.arr.normals.size(); ++j) {
        IntVec d = lat.arr.normals[j];
        if (st.signs[j] == 0) {
            poly.eq_normals.push_back(std::move(d));
        } else {
            for (auto& v : d) v *= st.signs[j];
            ineq_of[j] = static_cast<int>(poly.ineq_normals.size());
            poly.ineq_normals.push_back(std::move(d));
        }
    }
    for (const auto& g : lat.strata) {
        if (!conforms(g.signs, st.signs)) continue;
        std::vector<int> tight;
        for (std::size_t j = 0; j < g.signs.size(); ++j)
            if (g.signs[j] == 0 && st.signs[j] != 0) tight.push_back(ineq_of[j]);
        poly.faces.push_back(std::move(tight));
    }
    return poly;
}

enum class SolveStatus { InteriorMax, OnClosureBoundary, SupportCollapse, Infeasible };

inline const char* status_name(SolveStatus s)
{
    switch (s) {
    case SolveStatus::InteriorMax: return "InteriorMax";
    case SolveStatus::OnClosureBoundary: return "OnClosureBoundary";
    case SolveStatus::SupportCollapse: return "SupportCollapse";
    case SolveStatus::Infeasible: return "Infeasible";
    }
    return "?";
}

struct SolveOutcome {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> z;
    double psi = -std::numeric_limits<double>::infinity();
    double value = 0;                   // W(z)^k
    std::optional<Rational> exact_value; // set by the closed-form path
    std::optional<Profile<Rational>> exact_point;
    std::vector<int> tight;             // indices into ineq_normals
    SupportSet collapse_to;             // support left after the escape (SupportCollapse only)
    std::vector<double> direction;      // log-wealth escape direction over S (SupportCollapse only)
    int iterations = 0;
    double kkt_residual = 0;
    bool closed_form = false;
};

struct SolverOptions {
    bool allow_fast_path = true;
    double kkt_tol = 1e-10;
    double tight_tol = 1e-8;
    double escape_norm = 500;
    int max_iter = 10000;
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    int restricted_samples = 400;
};

class SolveFailure : public std::runtime_error {
public:
    SolveFailure(const std::string& what, std::vector<double> best) : std::runtime_error(what), best_(std::move(best)) {}
    const std::vector<double>& best_iterate() const { return best_; }

private:
    std::vector<double> best_;
};

namespace detail {

struct LseParts {
    double lse = 0;
    Eigen::VectorXd w; // softmax weights of the free coordinates
};

inline LseParts lse_parts(const StratumObjective& obj, const std::vector<double>& q, const Eigen::VectorXd& z)
{
    const auto free = obj.S.free_indices();
    double top = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) top = std::max(top, z[i]);
    double sum = q[static_cast<std::size_t>(obj.S.anchor())] * std::exp(-top);
    Eigen::VectorXd e(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        e[i] = q[static_cast<std::size_t>(free[static_cast<std::size_t>(i)])] * std::exp(z[i] - top);
        sum += e[i];
    }
    return {top + std::log(sum), e / sum};
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::VectorXd row_of(const IntVec& d)
{
    Eigen::VectorXd r(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) r[static_cast<Eigen::Index>(i)] = static_cast<double>(d[i]);
    return r;
}

} // namespace detail

inline double psi(const StratumObjective& obj, const std::vector<double>& z)
{
    const auto q = obj.q_double();
    auto parts = detail::lse_parts(obj, q, detail::to_eigen(z));
    const auto free = obj.S.free_indices();
    double lin = 0;
    for (std::size_t i = 0; i < free.size(); ++i) lin += obj.k[free[i]] * z[i];
    return lin - obj.n * parts.lse;
}

/// Gradient k_i - n w_i over the free coordinates.
inline Eigen::VectorXd psi_gradient(const StratumObjective& obj, const std::vector<double>& z)
{
    const auto q = obj.q_double();
    auto parts = detail::lse_parts(obj, q, detail::to_eigen(z));
    const auto free = obj.S.free_indices();
    Eigen::VectorXd g(static_cast<Eigen::Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i)
        g[static_cast<Eigen::Index>(i)] = obj.k[free[i]] - obj.n * parts.w[static_cast<Eigen::Index>(i)];
    return g;
}

/// Hessian -n (diag(w) - w w^T).
inline Eigen::MatrixXd psi_hessian(const StratumObjective& obj, const std::vector<double>& z)
{
    const auto q = obj.q_double();
    auto parts = detail::lse_parts(obj, q, detail::to_eigen(z));
    Eigen::MatrixXd H = parts.w * parts.w.transpose();
    H.diagonal() -= parts.w;
    return obj.n * H;
}

namespace detail {

// Orthonormal basis of { z : rows . z = 0 }.
inline Eigen::MatrixXd null_basis(const std::vector<const IntVec*>& rows, std::size_t dim)
{
    if (rows.empty()) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<IntVec> copy;
    for (const auto* r : rows) copy.push_back(*r);
    auto basis = nullspace(copy, dim);
    Eigen::MatrixXd B(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) B.col(static_cast<Eigen::Index>(j)) = row_of(basis[j]);
    if (B.cols() == 0) return B;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
    return qr.householderQ() * Eigen::MatrixXd::Identity(B.rows(), B.cols());
}

struct SpanResult {
    Eigen::VectorXd z;
    double psi = 0;
    double grad_norm = 0;
    int iterations = 0;
};

// Damped Newton for max psi(N y) from z0 (which must lie in the span of N). Returns nullopt
// when the iterates leave the escape box, i.e. the supremum on the span is not attained.
inline std::optional<SpanResult> newton_on_span(const StratumObjective& obj, const Eigen::MatrixXd& N,
                                                const Eigen::VectorXd& z0, const SolverOptions& opt)
{
    SpanResult res;
    res.z = z0;
    if (N.cols() == 0) {
        res.z.setZero();
        res.psi = psi(obj, from_eigen(res.z));
        return res;
    }
    const double gtol = opt.kkt_tol * std::max(1, obj.n);
    double f = psi(obj, from_eigen(res.z));
    for (int it = 0; it < opt.max_iter; ++it) {
        auto zv = from_eigen(res.z);
        Eigen::VectorXd g = N.transpose() * psi_gradient(obj, zv);
        res.grad_norm = g.lpNorm<Eigen::Infinity>();
        res.iterations = it;
        if (res.grad_norm <= gtol) {
            res.psi = f;
            return res;
        }
        Eigen::MatrixXd H = -(N.transpose() * psi_hessian(obj, zv) * N);
        Eigen::VectorXd p = H.ldlt().solve(g);
        if (!p.allFinite() || g.dot(p) <= 0) p = g;
        double len = p.lpNorm<Eigen::Infinity>();
        if (len > 10) p *= 10 / len;
        Eigen::VectorXd step = N * p;
        double t = 1;
        double slope = g.dot(p);
        bool accepted = false;
        const double slack = 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f));
        for (int h = 0; h < 80; ++h) {
            Eigen::VectorXd trial = res.z + t * step;
            double ft = psi(obj, from_eigen(trial));
            if (ft >= f + 1e-4 * t * slope - slack) {
                if ((t * step).lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, res.z.lpNorm<Eigen::Infinity>())) {
                    res.psi = std::max(f, ft);
                    return res;
                }
                res.z = trial;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No representable ascent left: the iterate is stationary to working precision.
            res.psi = f;
            return res;
        }
        if (res.z.lpNorm<Eigen::Infinity>() > opt.escape_norm) return std::nullopt;
    }
    throw SolveFailure("Newton iteration cap exceeded", from_eigen(res.z));
}

// Exact shadow point test: supp(k) = S and the shadow point satisfies every face row.
inline std::optional<std::vector<Rational>> shadow_ratios_if_inside(const StratumObjective& obj,
                                                                    const FacePolyhedron& poly)
{
    if (!(obj.k.support() == obj.S)) return std::nullopt;
    const auto free = obj.S.free_indices();
    const int r = obj.S.anchor();
    std::vector<Rational> rho;
    for (int i : free)
        rho.push_back(Rational(obj.k[i]) * obj.q[static_cast<std::size_t>(r)] /
                      (Rational(obj.k[r]) * obj.q[static_cast<std::size_t>(i)]));
    auto form_sign = [&](const IntVec& d) {
        Rational num = 1, den = 1;
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (d[j] > 0) num *= pow(rho[j], static_cast<unsigned>(d[j]));
            if (d[j] < 0) den *= pow(rho[j], static_cast<unsigned>(-d[j]));
        }
        return num > den ? 1 : (num < den ? -1 : 0);
    };
    for (const auto& d : poly.eq_normals)
        if (form_sign(d) != 0) return std::nullopt;
    for (const auto& d : poly.ineq_normals)
        if (form_sign(d) <= 0) return std::nullopt;
    return rho;
}

inline IntVec lift_chart_form(const IntVec& d)
{
    IntVec x(d.size() + 1, 0);
    Int total = 0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        x[j + 1] = d[j];
        total += d[j];
    }
    x[0] = -total;
    return x;
}

// Largest set of coordinates outside supp(k) that some closed-cone direction sends to -infinity
// while keeping supp(k) fixed; along such a direction psi strictly increases.
inline std::vector<int> collapse_set(const StratumObjective& obj, const FacePolyhedron& poly,
                                     std::vector<Rational>* direction)
{
    const std::size_t s = static_cast<std::size_t>(obj.S.size());
    ConeSystem base;
    base.dim = s;
    for (const auto& d : poly.eq_normals) base.equal.push_back(lift_chart_form(d));
    for (const auto& d : poly.ineq_normals) base.weak.push_back(lift_chart_form(d));
    std::vector<int> outside;
    for (std::size_t p = 0; p < s; ++p) {
        IntVec e(s, 0);
        int i = obj.S.idx[p];
        if (obj.k[i] > 0) {
            e[p] = 1;
            base.equal.push_back(std::move(e));
        } else {
            outside.push_back(static_cast<int>(p));
        }
    }
    for (int p : outside) {
        IntVec e(s, 0);
        e[static_cast<std::size_t>(p)] = -1;
        base.weak.push_back(std::move(e));
    }
    std::vector<int> collapsing;
    std::vector<Rational> sum(s, Rational(0));
    for (int p : outside) {
        ConeSystem sys = base;
        IntVec e(s, 0);
        e[static_cast<std::size_t>(p)] = -1;
        sys.strict.push_back(std::move(e));
        if (auto w = strictly_feasible(sys)) {
            collapsing.push_back(obj.S.idx[static_cast<std::size_t>(p)]);
            for (std::size_t i = 0; i < s; ++i) sum[i] += (*w)[i];
        }
    }
    if (direction) *direction = sum;
    return collapsing;
}

} // namespace detail

/// Recovers the face list of a polyhedron built without one: every subset of at most dim ineq rows.
inline void fill_faces_by_subsets(FacePolyhedron& poly)
{
    if (!poly.faces.empty()) return;
    const int k = static_cast<int>(poly.ineq_normals.size());
    const int maxsize = static_cast<int>(poly.dim);
    std::vector<int> cur;
    auto rec = [&](auto&& self, int start) -> void {
        poly.faces.push_back(cur);
        if (static_cast<int>(cur.size()) == maxsize) return;
        for (int j = start; j < k; ++j) {
            cur.push_back(j);
            self(self, j + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
}

inline SolveOutcome maximize_on_face_restricted(const StratumObjective& obj, const FacePolyhedron& poly,
                                                const RatioPoint& start,
                                                const std::vector<std::vector<double>>& rays,
                                                const SolverOptions& opt);

/// Maximizes psi over the closure of the face polyhedron.
/// Order of work: the closed-form shadow point when it lies strictly inside; an exact check for
/// escape towards a smaller support; otherwise Newton on the span of every closure face, keeping
/// the best maximizer that lies in its own face.
inline SolveOutcome maximize_on_face(const StratumObjective& obj, FacePolyhedron poly, const RatioPoint& start,
                                     const SolverOptions& opt = {}, const std::vector<std::vector<double>>& rays = {})
{
    if (!poly.extra.empty()) return maximize_on_face_restricted(obj, poly, start, rays, opt);
    const std::size_t D = poly.dim;
    const auto qd = obj.q_double();
    SolveOutcome out;

    if (opt.allow_fast_path) {
        if (auto rho = detail::shadow_ratios_if_inside(obj, poly)) {
            out.status = SolveStatus::InteriorMax;
            out.closed_form = true;
            out.exact_point = from_ratios_exact(obj.S, *rho, obj.q);
            out.exact_value = shadow_value(obj.k, obj.n, obj.q);
            out.value = to_double(*out.exact_value);
            for (const auto& r : *rho) out.z.push_back(std::log(to_double(r)));
            out.psi = std::log(out.value);
            return out;
        }
    }

    if (!(obj.k.support() == obj.S)) {
        std::vector<Rational> dir;
        auto coll = detail::collapse_set(obj, poly, &dir);
        if (!coll.empty()) {
            out.status = SolveStatus::SupportCollapse;
            std::vector<int> keep;
            for (int i : obj.S.idx)
                if (std::find(coll.begin(), coll.end(), i) == coll.end()) keep.push_back(i);
            out.collapse_to = SupportSet(keep);
            out.direction = to_double(dir);
            out.z = start.z;
            out.psi = psi(obj, start.z);
            out.value = std::exp(out.psi);
            return out;
        }
    }

    fill_faces_by_subsets(poly);
    std::vector<Eigen::VectorXd> A;
    for (const auto& d : poly.ineq_normals) A.push_back(detail::row_of(d));
    auto scale_of = [&](std::size_t j) { return A[j].lpNorm<1>(); };

    struct Candidate {
        Eigen::VectorXd z;
        double psi;
        int face;
        Eigen::Index span_dim;
        double grad_norm;
        int iterations;
    };
    std::optional<Candidate> best;
    int total_iterations = 0;
    const Eigen::VectorXd z0 = detail::to_eigen(start.z);
    for (std::size_t f = 0; f < poly.faces.size(); ++f) {
        std::vector<const IntVec*> rows;
        for (const auto& d : poly.eq_normals) rows.push_back(&d);
        for (int j : poly.faces[f]) rows.push_back(&poly.ineq_normals[static_cast<std::size_t>(j)]);
        Eigen::MatrixXd N = detail::null_basis(rows, D);
        Eigen::VectorXd zs = N * (N.transpose() * z0);
        auto res = detail::newton_on_span(obj, N, zs, opt);
        if (!res) continue;
        total_iterations += res->iterations;
        // The span maximizer must lie in the closed polyhedron.
        bool feasible = true;
        for (std::size_t j = 0; j < A.size() && feasible; ++j)
            if (A[j].dot(res->z) < -opt.tight_tol * scale_of(j) * std::max(1.0, res->z.lpNorm<Eigen::Infinity>()))
                feasible = false;
        if (!feasible) continue;
        bool better = !best || res->psi > best->psi + 1e-12 * std::max(1.0, std::abs(best->psi)) ||
                      (res->psi >= best->psi - 1e-12 * std::max(1.0, std::abs(best->psi)) &&
                       N.cols() > best->span_dim);
        if (better) best = Candidate{res->z, res->psi, static_cast<int>(f), N.cols(), res->grad_norm, res->iterations};
    }
    if (!best) throw SolveFailure("no closure face carries a maximizer", start.z);

    out.z = detail::from_eigen(best->z);
    out.psi = best->psi;
    out.value = std::exp(best->psi);
    out.kkt_residual = best->grad_norm;
    out.iterations = total_iterations;
    for (std::size_t j = 0; j < A.size(); ++j)
        if (A[j].dot(best->z) <= opt.tight_tol * scale_of(j) * std::max(1.0, best->z.lpNorm<Eigen::Infinity>()))
            out.tight.push_back(static_cast<int>(j));
    out.status = out.tight.empty() ? SolveStatus::InteriorMax : SolveStatus::OnClosureBoundary;
    return out;
}

namespace detail {

// Splitmix64 step; the solver only needs a small deterministic stream.
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) { return (splitmix64(state) >> 11) * 0x1.0p-53; }

// Family constraint in chart form: c_anchor + sum c_i e^{z_i} <= 0 with c = a - b q on S.
struct ChartHalfspace {
    double c0 = 0;
    Eigen::VectorXd c;
    bool always = false; // holds on the whole support face
    bool never = false;  // fails on the whole support face
};

inline ChartHalfspace chart_halfspace(const StratumObjective& obj, const WealthHalfspace& h)
{
    ChartHalfspace ch;
    const auto free = obj.S.free_indices();
    auto coeff = [&](int i) {
        return to_double(h.a[static_cast<std::size_t>(i)] - h.b * obj.q[static_cast<std::size_t>(i)]);
    };
    ch.c0 = coeff(obj.S.anchor());
    ch.c.resize(static_cast<Eigen::Index>(free.size()));
    bool any_pos = ch.c0 > 0, any_neg = ch.c0 < 0;
    for (std::size_t j = 0; j < free.size(); ++j) {
        ch.c[static_cast<Eigen::Index>(j)] = coeff(free[j]);
        any_pos = any_pos || ch.c[static_cast<Eigen::Index>(j)] > 0;
        any_neg = any_neg || ch.c[static_cast<Eigen::Index>(j)] < 0;
    }
    ch.always = !any_pos;
    ch.never = any_pos && !any_neg;
    return ch;
}

inline double chart_value(const ChartHalfspace& h, const Eigen::VectorXd& z)
{
    double top = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) top = std::max(top, z[i]);
    double s = h.c0 * std::exp(-top);
    for (Eigen::Index i = 0; i < z.size(); ++i) s += h.c[i] * std::exp(z[i] - top);
    return s; // same sign as the unscaled value
}

} // namespace detail

/// Restricted-family solve: samples positive ray combinations of the closure, keeps the best
/// points inside the family, and refines them with a log-barrier Newton method.
inline SolveOutcome maximize_on_face_restricted(const StratumObjective& obj, const FacePolyhedron& poly,
                                                const RatioPoint& start,
                                                const std::vector<std::vector<double>>& rays,
                                                const SolverOptions& opt)
{
    const std::size_t D = poly.dim;
    SolveOutcome out;
    std::vector<detail::ChartHalfspace> fam;
    for (const auto& h : poly.extra) {
        auto ch = detail::chart_halfspace(obj, h);
        if (ch.never) return out;
        if (!ch.always) fam.push_back(std::move(ch));
    }
    std::vector<Eigen::VectorXd> A;
    for (const auto& d : poly.ineq_normals) A.push_back(detail::row_of(d));
    std::vector<const IntVec*> eqrows;
    for (const auto& d : poly.eq_normals) eqrows.push_back(&d);
    const Eigen::MatrixXd N = detail::null_basis(eqrows, D);

    auto strictly_inside = [&](const Eigen::VectorXd& z) {
        for (const auto& a : A)
            if (!(a.dot(z) > 0)) return false;
        for (const auto& h : fam)
            if (!(detail::chart_value(h, z) < 0)) return false;
        return z.allFinite() && z.lpNorm<Eigen::Infinity>() <= opt.escape_norm;
    };
    auto objective = [&](const Eigen::VectorXd& z) { return psi(obj, detail::from_eigen(z)); };

    std::vector<Eigen::VectorXd> seeds;
    const Eigen::VectorXd z0 = detail::to_eigen(start.z);
    seeds.push_back(z0);
    std::uint64_t state = opt.seed;
    if (!rays.empty()) {
        for (int s = 0; s < opt.restricted_samples; ++s) {
            Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(D));
            for (const auto& r : rays) {
                double w = std::exp(std::log(1e-3) + detail::uniform01(state) * (std::log(60.0) - std::log(1e-3)));
                z += w * detail::to_eigen(r);
            }
            seeds.push_back(z);
        }
    } else {
        for (double s : {0.05, 0.25, 1.0, 4.0, 16.0}) seeds.push_back(s * z0);
    }
    std::vector<std::pair<double, Eigen::VectorXd>> feasible;
    for (const auto& z : seeds)
        if (strictly_inside(z)) feasible.emplace_back(objective(z), z);
    if (feasible.empty()) return out;
    std::sort(feasible.begin(), feasible.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (feasible.size() > 5) feasible.resize(5);

    auto barrier = [&](const Eigen::VectorXd& z, double mu, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
        auto zv = detail::from_eigen(z);
        double f = psi(obj, zv);
        if (grad) *grad = psi_gradient(obj, zv);
        if (hess) *hess = psi_hessian(obj, zv);
        for (const auto& a : A) {
            double s = a.dot(z);
            f += mu * std::log(s);
            if (grad) *grad += mu * a / s;
            if (hess) *hess -= mu * a * a.transpose() / (s * s);
        }
        for (const auto& h : fam) {
            // log(-u) with u = c0 + sum c_i e^{z_i}, evaluated after scaling by e^{-top}.
            double top = 0;
            for (Eigen::Index i = 0; i < z.size(); ++i) top = std::max(top, z[i]);
            Eigen::VectorXd e(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) e[i] = h.c[i] * std::exp(z[i] - top);
            double u = h.c0 * std::exp(-top) + e.sum();
            f += mu * (std::log(-u) + top);
            if (grad) *grad += mu * e / u;
            if (hess) {
                Eigen::MatrixXd Hu = Eigen::MatrixXd(e.asDiagonal()) / u - e * e.transpose() / (u * u);
                *hess += mu * Hu;
            }
        }
        return f;
    };

    Eigen::VectorXd best_z;
    double best_psi = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    for (auto [f0, z] : feasible) {
        for (double mu = 1e-1; mu >= 1e-12; mu *= 0.1) {
            for (int it = 0; it < 200; ++it) {
                ++iterations;
                Eigen::VectorXd g;
                Eigen::MatrixXd H;
                double f = barrier(z, mu, &g, &H);
                Eigen::VectorXd gr = N.transpose() * g;
                if (gr.lpNorm<Eigen::Infinity>() <= 1e-11 * std::max(1, obj.n)) break;
                Eigen::MatrixXd Hr = -(N.transpose() * H * N);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hr);
                double lo = es.eigenvalues().minCoeff();
                if (lo < 1e-10) Hr += (1e-10 - lo + 1e-8 * std::max(1.0, es.eigenvalues().maxCoeff())) *
                                      Eigen::MatrixXd::Identity(Hr.rows(), Hr.cols());
                Eigen::VectorXd p = N * Hr.ldlt().solve(gr);
                double len = p.lpNorm<Eigen::Infinity>();
                if (len > 5) p *= 5 / len;
                double slope = g.dot(p);
                double t = 1;
                bool moved = false;
                for (int h = 0; h < 60; ++h) {
                    Eigen::VectorXd trial = z + t * p;
                    if (strictly_inside(trial) && barrier(trial, mu, nullptr, nullptr) >= f + 1e-4 * t * slope) {
                        z = trial;
                        moved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!moved) break;
            }
        }
        double v = objective(z);
        if (v > best_psi) {
            best_psi = v;
            best_z = z;
        }
    }
    out.z = detail::from_eigen(best_z);
    out.psi = best_psi;
    out.value = std::exp(best_psi);
    out.iterations = iterations;
    for (std::size_t j = 0; j < A.size(); ++j)
        if (A[j].dot(best_z) <= opt.tight_tol * A[j].lpNorm<1>() * std::max(1.0, best_z.lpNorm<Eigen::Infinity>()))
            out.tight.push_back(static_cast<int>(j));
    bool family_tight = false;
    for (const auto& h : fam) {
        double top = 0;
        for (Eigen::Index i = 0; i < best_z.size(); ++i) top = std::max(top, best_z[i]);
        double mag = std::abs(h.c0) * std::exp(-top);
        for (Eigen::Index i = 0; i < best_z.size(); ++i) mag += std::abs(h.c[i]) * std::exp(best_z[i] - top);
        if (-detail::chart_value(h, best_z) <= 1e-6 * mag) family_tight = true;
    }
    out.status = out.tight.empty() && !family_tight ? SolveStatus::InteriorMax : SolveStatus::OnClosureBoundary;
    return out;
}

} // namespace qkelly

#endif // QKELLY_STRATUM_SOLVER_HPP
