#ifndef QKELLY_ARRANGEMENT_HPP
#define QKELLY_ARRANGEMENT_HPP

#include "exact_lp.hpp"
#include "integer_linalg.hpp"
#include "problem_model.hpp"
#include "rational.hpp"
#include "support_set.hpp"
#include "wealth_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qkelly {

using SignVector = std::vector<signed char>;

inline std::string sign_string(const SignVector& s)
{
    std::string out;
    for (signed char c : s) out += c > 0 ? '+' : (c < 0 ? '-' : '0');
    return out;
}

/// Central arrangement of canonical count-difference normals in the ratio chart of S.
struct Arrangement {
    SupportSet S;
    std::size_t dim = 0;
    std::vector<IntVec> normals;
    std::map<IntVec, int> index;

    /// Index of the canonical class of d and the sign of the factor d = lambda * normal.
    std::pair<int, int> classify(IntVec d) const
    {
        int orient = canonicalize(d);
        auto it = index.find(d);
        if (it == index.end()) throw std::logic_error("difference vector has no arrangement normal");
        return {it->second, orient};
    }

    /// The same linear form written over log-wealth coordinates x indexed by S (anchor first).
    IntVec lift_to_log_wealth(const IntVec& d) const
    {
        IntVec x(dim + 1, 0);
        Int total = 0;
        for (std::size_t j = 0; j < dim; ++j) {
            x[j + 1] = d[j];
            total += d[j];
        }
        x[0] = -total;
        return x;
    }
};

/// Projection of k - l onto the chart coordinates S minus its anchor.
inline IntVec projected_difference(const CountVector& k, const CountVector& l, const SupportSet& S)
{
    IntVec d;
    for (int i : S.free_indices()) d.push_back(k[i] - l[i]);
    return d;
}

inline std::vector<IntVec> difference_normals(const std::vector<CountVector>& counts, const SupportSet& S)
{
    std::vector<const CountVector*> inside;
    for (const auto& k : counts)
        if (k.supported_in(S)) inside.push_back(&k);
    std::set<IntVec> uniq;
    for (std::size_t a = 0; a < inside.size(); ++a)
        for (std::size_t b = a + 1; b < inside.size(); ++b) {
            IntVec d = projected_difference(*inside[a], *inside[b], S);
            if (is_zero(d)) continue;
            canonicalize(d);
            uniq.insert(std::move(d));
        }
    return {uniq.begin(), uniq.end()};
}

inline Arrangement make_arrangement(const std::vector<CountVector>& counts, const SupportSet& S)
{
    Arrangement a;
    a.S = S;
    a.dim = static_cast<std::size_t>(S.chart_dim());
    a.normals = difference_normals(counts, S);
    for (std::size_t i = 0; i < a.normals.size(); ++i) a.index.emplace(a.normals[i], static_cast<int>(i));
    return a;
}

struct Stratum {
    int id = -1;
    int lattice = -1;
    int local = -1;
    SupportSet S;
    SignVector signs;
    int dim = 0;

    std::pair<int, int> rank() const { return {S.size(), dim}; }
    std::string label() const { return S.to_string() + "[" + sign_string(signs) + "]"; }
};

inline std::pair<int, int> stratum_rank(const Stratum& st) { return st.rank(); }

/// All relatively open faces of one support set's arrangement.
struct FaceLattice {
    Arrangement arr;
    std::vector<Stratum> strata;
    std::vector<IntVec> rays;
    std::vector<SignVector> ray_signs;
    std::map<SignVector, int> lookup;

    std::optional<int> find(const SignVector& s) const
    {
        auto it = lookup.find(s);
        if (it == lookup.end()) return std::nullopt;
        return it->second;
    }
};

namespace detail {

class FaceEnumerator {
public:
    explicit FaceEnumerator(const Arrangement& arr) : arr_(arr) {}

    void run()
    {
        std::vector<IntVec> basis;
        for (std::size_t i = 0; i < arr_.dim; ++i) {
            IntVec e(arr_.dim, 0);
            e[i] = 1;
            basis.push_back(std::move(e));
        }
        chambers(std::vector<bool>(arr_.normals.size(), false), basis);
        chambers(std::vector<bool>(arr_.normals.size(), true), {});
    }

    const std::map<std::vector<bool>, std::pair<int, std::vector<SignVector>>>& flats() const { return memo_; }
    const std::vector<std::pair<IntVec, SignVector>>& rays() const { return rays_; }

private:
    const std::vector<SignVector>& chambers(const std::vector<bool>& zero, const std::vector<IntVec>& basis)
    {
        auto found = memo_.find(zero);
        if (found != memo_.end()) return found->second.second;
        const std::size_t nn = arr_.normals.size();
        const int d = static_cast<int>(basis.size());
        std::set<SignVector> result;
        if (d == 0) {
            result.insert(SignVector(nn, 0));
        } else if (d == 1) {
            IntVec v = basis[0];
            canonicalize(v);
            SignVector s(nn);
            for (std::size_t i = 0; i < nn; ++i) s[i] = static_cast<signed char>(sign_of(dot(arr_.normals[i], v)));
            SignVector t(s);
            for (auto& c : t) c = static_cast<signed char>(-c);
            IntVec w(v);
            for (auto& x : w) x = -x;
            rays_.emplace_back(v, s);
            rays_.emplace_back(w, t);
            result.insert(s);
            result.insert(t);
        } else {
            std::map<IntVec, std::vector<std::pair<std::size_t, int>>> classes;
            for (std::size_t i = 0; i < nn; ++i) {
                if (zero[i]) continue;
                IntVec r = restrict_form(arr_.normals[i], basis);
                if (is_zero(r)) throw std::logic_error("flat zero set is inconsistent");
                int orient = canonicalize(r);
                classes[r].emplace_back(i, orient);
            }
            for (const auto& [h, members] : classes) {
                std::vector<bool> sub_zero(zero);
                for (const auto& mem : members) sub_zero[mem.first] = true;
                std::vector<IntVec> sub_basis;
                for (const auto& y : nullspace({h}, static_cast<std::size_t>(d)))
                    sub_basis.push_back(embed(y, basis, arr_.dim));
                const auto& facets = chambers(sub_zero, sub_basis);
                for (const auto& E : facets)
                    for (int s : {1, -1}) {
                        SignVector F(E);
                        for (const auto& [i, o] : members) F[i] = static_cast<signed char>(s * o);
                        result.insert(std::move(F));
                    }
            }
        }
        auto& slot = memo_[zero];
        slot.first = d;
        slot.second.assign(result.begin(), result.end());
        return slot.second;
    }

    const Arrangement& arr_;
    std::map<std::vector<bool>, std::pair<int, std::vector<SignVector>>> memo_;
    std::vector<std::pair<IntVec, SignVector>> rays_;
};

} // namespace detail

/// Enumerates every relatively open face of the arrangement on S, ordered by dimension
/// (largest first) and then lexicographically by sign vector.
inline FaceLattice enumerate_strata(const std::vector<CountVector>& counts, const SupportSet& S)
{
    FaceLattice lat;
    lat.arr = make_arrangement(counts, S);
    detail::FaceEnumerator fe(lat.arr);
    fe.run();
    std::vector<std::pair<int, SignVector>> faces;
    for (const auto& [zero, entry] : fe.flats())
        for (const auto& s : entry.second) faces.emplace_back(entry.first, s);
    std::sort(faces.begin(), faces.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; i < faces.size(); ++i) {
        Stratum st;
        st.local = static_cast<int>(i);
        st.S = S;
        st.signs = faces[i].second;
        st.dim = faces[i].first;
        if (!lat.lookup.emplace(st.signs, st.local).second) throw std::logic_error("duplicate face sign vector");
        lat.strata.push_back(std::move(st));
    }
    for (const auto& [v, s] : fe.rays()) {
        lat.rays.push_back(v);
        lat.ray_signs.push_back(s);
    }
    return lat;
}

inline FaceLattice enumerate_strata(const ProblemInstance& inst, const SupportSet& S)
{
    return enumerate_strata(enumerate_counts(inst.m, inst.n), S);
}

/// G is a face of the closure of F.
inline bool conforms(const SignVector& G, const SignVector& F)
{
    for (std::size_t i = 0; i < G.size(); ++i)
        if (G[i] != 0 && G[i] != F[i]) return false;
    return true;
}

/// Rays of the closure of a stratum, as indices into lat.rays.
inline std::vector<int> closure_rays(const FaceLattice& lat, const Stratum& st)
{
    std::vector<int> out;
    for (std::size_t r = 0; r < lat.rays.size(); ++r)
        if (conforms(lat.ray_signs[r], st.signs)) out.push_back(static_cast<int>(r));
    return out;
}

/// Positive combination of closure rays with the given weights (1 / ||ray||_inf when empty).
inline std::vector<Rational> ray_combination(const FaceLattice& lat, const Stratum& st,
                                             const std::vector<Rational>& weights = {})
{
    std::vector<Rational> z(lat.arr.dim, Rational(0));
    if (st.dim == 0) return z;
    auto rays = closure_rays(lat, st);
    for (std::size_t j = 0; j < rays.size(); ++j) {
        const auto& v = lat.rays[static_cast<std::size_t>(rays[j])];
        Int top = 0;
        for (Int x : v) top = std::max(top, x < 0 ? -x : x);
        Rational w = weights.empty() ? Rational(1, top) : weights[j % weights.size()];
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += w * v[i];
    }
    return z;
}

inline SignVector signs_of(const Arrangement& arr, const std::vector<Rational>& z)
{
    SignVector s;
    for (const auto& d : arr.normals) {
        Rational v = 0;
        for (std::size_t i = 0; i < d.size(); ++i) v += Rational(d[i]) * z[i];
        s.push_back(static_cast<signed char>(v.sign()));
    }
    return s;
}

/// Sign vector at a double point; |d.z| below tol * ||d||_1 counts as zero.
inline SignVector signs_of(const Arrangement& arr, const std::vector<double>& z, double tol = 1e-9)
{
    SignVector s;
    for (const auto& d : arr.normals) {
        double v = 0, scale = 0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            v += static_cast<double>(d[i]) * z[i];
            scale += std::abs(static_cast<double>(d[i]));
        }
        s.push_back(static_cast<signed char>(v > tol * scale ? 1 : (v < -tol * scale ? -1 : 0)));
    }
    return s;
}

/// Exact sign vector of a rational profile whose support is arr.S.
inline SignVector signs_of_profile(const Arrangement& arr, const Profile<Rational>& W)
{
    const auto free = arr.S.free_indices();
    const Rational& wr = W[static_cast<std::size_t>(arr.S.anchor())];
    std::vector<Rational> rho;
    for (int i : free) rho.push_back(W[static_cast<std::size_t>(i)] / wr);
    SignVector s;
    for (const auto& d : arr.normals) {
        Rational num = 1, den = 1;
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (d[j] > 0) num *= pow(rho[j], static_cast<unsigned>(d[j]));
            if (d[j] < 0) den *= pow(rho[j], static_cast<unsigned>(-d[j]));
        }
        s.push_back(static_cast<signed char>(num > den ? 1 : (num < den ? -1 : 0)));
    }
    return s;
}

inline constexpr double kInteriorMargin = 1e-6;

/// Deterministic relative-interior point: the normalized sum of the closure rays,
/// rescaled to unit sup-norm and then enlarged if its margin falls below 1e-6.
inline RatioPoint interior_point(const FaceLattice& lat, const Stratum& st)
{
    RatioPoint zp{st.S, std::vector<double>(lat.arr.dim, 0.0)};
    if (st.dim == 0) return zp;
    auto exact = ray_combination(lat, st);
    if (signs_of(lat.arr, exact) != st.signs) throw std::logic_error("interior point left its stratum");
    double top = 0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        zp.z[i] = to_double(exact[i]);
        top = std::max(top, std::abs(zp.z[i]));
    }
    for (double& v : zp.z) v /= top;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lat.arr.normals.size(); ++j) {
        if (st.signs[j] == 0) continue;
        double v = 0;
        for (std::size_t i = 0; i < zp.z.size(); ++i) v += static_cast<double>(lat.arr.normals[j][i]) * zp.z[i];
        margin = std::min(margin, v * st.signs[j]);
    }
    if (margin < kInteriorMargin)
        for (double& v : zp.z) v *= kInteriorMargin / margin;
    return zp;
}

/// Exact point of the stratum: wealth ratios rho = prod_j t_j^{ray_j} for rational t_j > 1.
inline Profile<Rational> exact_point(const FaceLattice& lat, const Stratum& st, const std::vector<Rational>& q,
                                     const std::vector<Rational>& t)
{
    std::vector<Rational> rho(lat.arr.dim, Rational(1));
    if (st.dim > 0) {
        auto rays = closure_rays(lat, st);
        for (std::size_t j = 0; j < rays.size(); ++j) {
            const Rational& base = t[j % t.size()];
            if (base <= 1) throw std::invalid_argument("exact_point bases must exceed 1");
            const auto& v = lat.rays[static_cast<std::size_t>(rays[j])];
            for (std::size_t i = 0; i < rho.size(); ++i) {
                if (v[i] > 0) rho[i] *= pow(base, static_cast<unsigned>(v[i]));
                if (v[i] < 0) rho[i] /= pow(base, static_cast<unsigned>(-v[i]));
            }
        }
    }
    return from_ratios_exact(st.S, rho, q);
}

/// Face lattices for every support set of an instance, with global ids in decreasing rank order.
struct Atlas {
    std::vector<FaceLattice> lattices;
    std::vector<Stratum> strata;

    const FaceLattice& lattice_of(const Stratum& st) const { return lattices[static_cast<std::size_t>(st.lattice)]; }

    std::optional<int> lattice_index(const SupportSet& S) const
    {
        for (std::size_t i = 0; i < lattices.size(); ++i)
            if (lattices[i].arr.S == S) return static_cast<int>(i);
        return std::nullopt;
    }

    int global_id(int lattice, int local) const
    {
        return lattices[static_cast<std::size_t>(lattice)].strata[static_cast<std::size_t>(local)].id;
    }

    /// Stratum containing an exact profile.
    int locate(const Profile<Rational>& W) const
    {
        SupportSet S = support_of(W);
        auto li = lattice_index(S);
        if (!li) throw std::logic_error("support set missing from atlas");
        const auto& lat = lattices[static_cast<std::size_t>(*li)];
        auto local = lat.find(signs_of_profile(lat.arr, W));
        if (!local) throw std::logic_error("profile sign vector is not an enumerated face");
        return global_id(*li, *local);
    }

    /// Stratum containing a double profile; near-ties within tol count as ties.
    std::optional<int> locate(const Profile<double>& W, const std::vector<double>& q, double tol = 1e-9) const
    {
        SupportSet S = support_of(W, q);
        auto li = lattice_index(S);
        if (!li) return std::nullopt;
        const auto& lat = lattices[static_cast<std::size_t>(*li)];
        auto local = lat.find(signs_of(lat.arr, to_ratio(W, S).z, tol));
        if (!local) return std::nullopt;
        return global_id(*li, *local);
    }
};

template <class ParallelFor>
Atlas build_atlas(const std::vector<CountVector>& counts, int m, ParallelFor&& parallel_for)
{
    Atlas at;
    auto supports = all_supports(m);
    at.lattices.resize(supports.size());
    parallel_for(supports.size(), [&](std::size_t i) { at.lattices[i] = enumerate_strata(counts, supports[i]); });
    std::vector<std::pair<int, int>> order;
    for (std::size_t l = 0; l < at.lattices.size(); ++l)
        for (std::size_t s = 0; s < at.lattices[l].strata.size(); ++s)
            order.emplace_back(static_cast<int>(l), static_cast<int>(s));
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        auto ra = at.lattices[static_cast<std::size_t>(a.first)].strata[static_cast<std::size_t>(a.second)].rank();
        auto rb = at.lattices[static_cast<std::size_t>(b.first)].strata[static_cast<std::size_t>(b.second)].rank();
        return ra > rb;
    });
    for (std::size_t g = 0; g < order.size(); ++g) {
        auto& st = at.lattices[static_cast<std::size_t>(order[g].first)].strata[static_cast<std::size_t>(order[g].second)];
        st.id = static_cast<int>(g);
        st.lattice = order[g].first;
        at.strata.push_back(st);
    }
    return at;
}

inline Atlas build_atlas(const std::vector<CountVector>& counts, int m)
{
    return build_atlas(counts, m, [](std::size_t n, auto&& fn) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
    });
}

namespace detail {

// Closed cone of a stratum written over log-wealth coordinates indexed by its support.
inline void closed_cone_rows(const FaceLattice& lat, const Stratum& st, ConeSystem& sys)
{
    for (std::size_t j = 0; j < lat.arr.normals.size(); ++j) {
        IntVec x = lat.arr.lift_to_log_wealth(lat.arr.normals[j]);
        if (st.signs[j] == 0) {
            sys.equal.push_back(std::move(x));
        } else {
            for (auto& v : x) v *= st.signs[j];
            sys.weak.push_back(std::move(x));
        }
    }
}

inline int position_in(const SupportSet& S, int i)
{
    return static_cast<int>(std::lower_bound(S.idx.begin(), S.idx.end(), i) - S.idx.begin());
}

} // namespace detail

/// Whether the closure of parent (in the simplex) reaches the support face T:
/// some h in the closed cone has h_i = 0 on T and h_i < 0 off T.
inline bool closure_reaches(const FaceLattice& lat, const Stratum& parent, const SupportSet& T)
{
    ConeSystem sys;
    sys.dim = static_cast<std::size_t>(parent.S.size());
    detail::closed_cone_rows(lat, parent, sys);
    for (int p = 0; p < parent.S.size(); ++p) {
        IntVec e(sys.dim, 0);
        int i = parent.S.idx[static_cast<std::size_t>(p)];
        if (T.contains(i)) {
            e[static_cast<std::size_t>(p)] = 1;
            sys.equal.push_back(std::move(e));
        } else {
            e[static_cast<std::size_t>(p)] = -1;
            sys.strict.push_back(std::move(e));
        }
    }
    return strictly_feasible(sys).has_value();
}

/// Whether a stratum on a smaller support meets the closure of parent; assumes closure_reaches.
inline bool meets_closure(const FaceLattice& plat, const Stratum& parent, const FaceLattice& clat,
                          const Stratum& child)
{
    ConeSystem sys;
    sys.dim = static_cast<std::size_t>(parent.S.size());
    detail::closed_cone_rows(plat, parent, sys);
    const auto& T = child.S;
    for (std::size_t j = 0; j < clat.arr.normals.size(); ++j) {
        IntVec local = clat.arr.lift_to_log_wealth(clat.arr.normals[j]);
        IntVec x(sys.dim, 0);
        for (int p = 0; p < T.size(); ++p)
            x[static_cast<std::size_t>(detail::position_in(parent.S, T.idx[static_cast<std::size_t>(p)]))] =
                local[static_cast<std::size_t>(p)];
        if (child.signs[j] == 0) {
            sys.equal.push_back(std::move(x));
        } else {
            for (auto& v : x) v *= child.signs[j];
            sys.strict.push_back(std::move(x));
        }
    }
    return strictly_feasible(sys).has_value();
}

/// Same-support faces of the closure plus smaller-support strata meeting the closure, by global id.
inline std::vector<int> child_strata(const Atlas& at, int id)
{
    const Stratum& st = at.strata[static_cast<std::size_t>(id)];
    const FaceLattice& lat = at.lattice_of(st);
    std::vector<int> out;
    for (const auto& other : lat.strata)
        if (other.local != st.local && other.dim < st.dim && conforms(other.signs, st.signs)) out.push_back(other.id);
    for (std::size_t l = 0; l < at.lattices.size(); ++l) {
        const auto& clat = at.lattices[l];
        const SupportSet& T = clat.arr.S;
        if (T.size() >= st.S.size() || !T.subset_of(st.S)) continue;
        if (!closure_reaches(lat, st, T)) continue;
        for (const auto& child : clat.strata)
            if (meets_closure(lat, st, clat, child)) out.push_back(child.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Stratum on the smaller support T carrying the parent's sign pattern restricted to T.
inline SignVector inherited_signs(const FaceLattice& plat, const Stratum& parent, const FaceLattice& clat)
{
    SignVector s;
    for (const auto& d : clat.arr.normals) {
        IntVec full(plat.arr.dim, 0);
        const auto& T = clat.arr.S;
        auto tfree = T.free_indices();
        Int total = 0;
        for (std::size_t j = 0; j < d.size(); ++j) total += d[j];
        // Rebuild the log-wealth form over S and project it to S's chart.
        IntVec x(static_cast<std::size_t>(parent.S.size()), 0);
        x[static_cast<std::size_t>(detail::position_in(parent.S, T.anchor()))] = -total;
        for (std::size_t j = 0; j < d.size(); ++j)
            x[static_cast<std::size_t>(detail::position_in(parent.S, tfree[j]))] += d[j];
        for (std::size_t j = 0; j < full.size(); ++j) full[j] = x[j + 1];
        auto [cls, orient] = plat.arr.classify(full);
        s.push_back(static_cast<signed char>(orient * parent.signs[static_cast<std::size_t>(cls)]));
    }
    return s;
}

} // namespace qkelly

#endif // QKELLY_ARRANGEMENT_HPP
