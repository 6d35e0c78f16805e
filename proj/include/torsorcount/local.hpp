#pragma once

#include <complex>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "star.hpp"

namespace torsorcount {

class capability_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::complex<double> unit_root(long long num, long long den) {
    long double a = 2.0L * 3.14159265358979323846264338327950288L *
                    static_cast<long double>(((num % den) + den) % den) / den;
    return {static_cast<double>(cosl(a)), static_cast<double>(sinl(a))};
}

// A tame place: residue size, the Frobenius as an element of the Galois
// quotient, and the tameness constraint gcd(q, |J|) = 1.  The cyclotomic
// value of the Frobenius must be q mod e.
struct LocalPlace {
    long long q = 0;
    int frob = 0;
    bool tame = true;
};

inline void validate_place(const GammaGroup& gg, const LocalPlace& v) {
    if (v.q < 2) throw group_error("residue size must be at least 2");
    if (std::gcd(v.q, static_cast<long long>(gg.base().order())) != 1)
        throw group_error("place is not tame for this group");
    long long e = gg.base().exponent();
    if (v.frob < 0 || v.frob >= gg.gamma().order()) throw group_error("frobenius index out of range");
    if (gg.quotient().cyclotomic_mod(v.frob, e) != ((v.q % e) + e) % e)
        throw group_error("cyclotomic value of the frobenius must equal q_v mod e");
    if (!v.tame) throw capability_error("wild places are not modeled");
}

// Local H^1 data at a tame place of an abelian Gamma-group: the residue
// points are the Frobenius-fixed star points, every fiber of the residue map
// carries #G(F_v) classes, and the measure gives each class weight
// 1/#G(F_v), so each fiber has mass one.
class LocalCohomology {
public:
    LocalCohomology(const GammaGroup& gg, const StarSet& star, LocalPlace place)
        : owner_(&gg), star_(&star), place_(place) {
        validate_place(gg, place);
        if (!gg.base().is_abelian())
            throw capability_error("exact local fiber counts need an abelian group");
        unramified_size_ = 0;
        for (int j = 0; j < gg.base().order(); ++j)
            if (gg.act(place.frob, j) == j) ++unramified_size_;
        for (int p = 0; p < star.size(); ++p)
            if (star.act(place.frob, p) == p) residue_points_.push_back(p);
    }

    const GammaGroup& owner() const { return *owner_; }
    const StarSet& star() const { return *star_; }
    const LocalPlace& place() const { return place_; }

    // #G(F_v)
    int unramified_size() const { return unramified_size_; }
    // G_*(F_v) as star points
    const std::vector<int>& residue_points() const { return residue_points_; }
    // #H^1(Gamma_v, G)
    long long total_classes() const {
        return static_cast<long long>(residue_points_.size()) * unramified_size_;
    }
    Rational class_weight() const { return Rational(1, unramified_size_); }
    Rational unramified_mass() const { return Rational(unramified_size_) * class_weight(); }
    Rational total_mass() const { return Rational(total_classes()) * class_weight(); }

private:
    const GammaGroup* owner_;
    const StarSet* star_;
    LocalPlace place_;
    int unramified_size_ = 0;
    std::vector<int> residue_points_;
};

// Mass of each residue fiber, indexed by star point; only Frobenius-fixed
// points appear.  Every fiber has mass one and the distinguished point's
// fiber is the unramified subset.
inline std::map<int, Rational> residue_fibers(const LocalCohomology& lc) {
    std::map<int, Rational> out;
    for (int p : lc.residue_points())
        out[p] = Rational(lc.unramified_size()) * lc.class_weight();
    return out;
}

// Homomorphisms J -> Z/e, each as the value vector on elements, sorted
// lexicographically (so the zero map comes first).  Enumerated from
// generator images.
inline std::vector<std::vector<int>> homs_to_cyclic(const FiniteGroup& J, long long e) {
    std::vector<int> gens = detail::generating_set(J);
    int ng = static_cast<int>(gens.size());
    struct Step { int prev, gen; };
    std::vector<Step> how(J.order(), Step{-1, -1});
    std::vector<int> disc{0};
    {
        std::vector<char> seen(J.order(), 0);
        seen[0] = 1;
        for (std::size_t i = 0; i < disc.size(); ++i)
            for (int k = 0; k < ng; ++k) {
                int nxt = J.mul(disc[i], gens[k]);
                if (!seen[nxt]) {
                    seen[nxt] = 1;
                    how[nxt] = Step{disc[i], k};
                    disc.push_back(nxt);
                }
            }
    }
    std::vector<std::vector<int>> out;
    std::vector<int> img(ng == 0 ? 1 : ng, 0);
    std::vector<int> f(J.order(), 0);
    while (true) {
        for (int idx : disc) {
            if (idx == 0) { f[0] = 0; continue; }
            f[idx] = static_cast<int>((f[how[idx].prev] + img[how[idx].gen]) % e);
        }
        bool ok = true;
        for (int a = 0; a < J.order() && ok; ++a)
            for (int b = 0; b < J.order() && ok; ++b)
                if (f[J.mul(a, b)] != (f[a] + f[b]) % e) ok = false;
        if (ok) out.push_back(f);
        int pos = ng - 1;
        while (pos >= 0 && img[pos] == e - 1) { img[pos] = 0; --pos; }
        if (pos < 0) break;
        ++img[pos];
    }
    std::sort(out.begin(), out.end());
    return out;
}

// An exact e-th root of unity, kept as an exponent.
struct UnitRoot {
    long long num = 0;
    long long den = 1;
    std::complex<double> value() const { return unit_root(num, den); }
    std::complex<double> conj_value() const { return unit_root(-num, den); }
};

// The Tate-pairing value of any local class x in the fiber over phi against
// an unramified dual character with chi(Frob_v) = chi_frob: the returned
// root of unity is exp(+2 pi i (chi_frob o phi)/e).
inline UnitRoot tate_pairing_value(const LocalCohomology& lc, const std::vector<int>& chi_frob,
                                   int phi) {
    const FiniteGroup& J = lc.owner().base();
    long long e = J.exponent();
    if (static_cast<int>(chi_frob.size()) != J.order())
        throw group_error("character value vector has wrong length");
    for (int a = 0; a < J.order(); ++a)
        for (int b = 0; b < J.order(); ++b)
            if (chi_frob[J.mul(a, b)] != (chi_frob[a] + chi_frob[b]) % e)
                throw group_error("character value is not a homomorphism");
    if (lc.star().act(lc.place().frob, phi) != phi)
        throw group_error("residue point is not Frobenius fixed");
    return UnitRoot{chi_frob[lc.star().rep(phi)], e};
}

// Bad-place override for a height: a finite table of (mass, height,
// character value) triples replacing the tame formula.
struct OverrideEntry {
    Rational mass;
    Rational height;
    UnitRoot chi;  // the character value on that piece
};
struct LocalOverride {
    std::vector<OverrideEntry> entries;

    static LocalOverride constant_one(Rational total_mass) {
        return LocalOverride{{OverrideEntry{total_mass, Rational(1), UnitRoot{0, 1}}}};
    }
};

// A height's local layer: the counting function at tame places plus explicit
// tables at the declared bad set.
struct LocalHeight {
    CountingFunction counting;
    std::map<long long, LocalOverride> overrides;  // keyed by q_v
};

inline std::complex<double> power_q(long long q, const Rational& c, std::complex<double> s) {
    return std::exp(-s * (c.to_double() * std::log(static_cast<double>(q))));
}

// Local Fourier transform of the height against an unramified character:
// sum over Frobenius-fixed star points phi of q^(-c(phi) s) * conj(pairing).
// At an overridden place the explicit finite table is summed instead.
inline std::complex<double> local_fourier(const LocalCohomology& lc, const LocalHeight& h,
                                          const std::vector<int>& chi_frob,
                                          std::complex<double> s) {
    auto it = h.overrides.find(lc.place().q);
    if (it != h.overrides.end()) {
        std::complex<double> acc = 0.0;
        for (const auto& en : it->second.entries) {
            std::complex<double> hposs = std::exp(-s * std::log(en.height.to_double()));
            acc += en.mass.to_double() * hposs * en.chi.conj_value();
        }
        return acc;
    }
    std::complex<double> acc = 0.0;
    for (int p : lc.residue_points()) {
        UnitRoot w = tate_pairing_value(lc, chi_frob, p);
        acc += power_q(lc.place().q, h.counting.values[p], s) * w.conj_value();
    }
    return acc;
}

// ---- finite model of the tame local Galois group ------------------------
//
// T = mu_e x| <Frob>, with Frobenius acting on the inertia factor by the
// q-th power map.  Elements are (i, k) with i in Z/e, k in Z/f where f is
// the order of the Frobenius in the Galois quotient; index = k*e + i.
struct TameLocalModel {
    GammaGroup group;        // T acting on J (inertia acts trivially)
    long long e = 1;
    int f = 1;
    int inertia_generator;   // index of (1, 0)

    int index(long long i, int k) const { return static_cast<int>(k * e + ((i % e) + e) % e); }
};

inline TameLocalModel tame_local_model(const GammaGroup& gg, const LocalPlace& v) {
    validate_place(gg, v);
    long long e = gg.base().exponent();
    int f = gg.gamma().element_order(v.frob);
    long long q = ((v.q % e) + e) % e;
    int n = static_cast<int>(e) * f;
    std::vector<long long> qpow(f);
    qpow[0] = 1 % e;
    for (int k = 1; k < f; ++k) qpow[k] = (qpow[k - 1] * q) % e;
    auto idx = [&](long long i, int k) { return static_cast<int>(k * e + ((i % e) + e) % e); };
    std::vector<int> table(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < f; ++k)
        for (long long i = 0; i < e; ++i)
            for (int k2 = 0; k2 < f; ++k2)
                for (long long i2 = 0; i2 < e; ++i2)
                    table[static_cast<std::size_t>(idx(i, k)) * n + idx(i2, k2)] =
                        idx(i + qpow[k] * i2, (k + k2) % f);
    FiniteGroup T("tame-local-q" + std::to_string(v.q), std::move(table));
    std::vector<long long> chi(n);
    for (int k = 0; k < f; ++k)
        for (long long i = 0; i < e; ++i) chi[idx(i, k)] = qpow[k] == 0 ? 1 : qpow[k];
    if (e == 1) std::fill(chi.begin(), chi.end(), 1);
    // J-action through the Frobenius power; inertia acts trivially.
    std::vector<std::vector<int>> action(n);
    std::vector<int> frob_pow(gg.base().order());
    std::iota(frob_pow.begin(), frob_pow.end(), 0);
    for (int k = 0; k < f; ++k) {
        for (long long i = 0; i < e; ++i) action[idx(i, k)] = frob_pow;
        std::vector<int> next(gg.base().order());
        for (int j = 0; j < gg.base().order(); ++j) next[j] = gg.act(v.frob, frob_pow[j]);
        frob_pow = next;
    }
    GaloisQuotient quot(std::move(T), e, std::move(chi), gg.quotient().field());
    TameLocalModel m{GammaGroup(gg.base(), std::move(quot), std::move(action)), e, f, idx(1, 0)};
    return m;
}

// The residue of a local cocycle: its restriction to inertia is a
// homomorphism mu_e -> J, i.e. the star point of beta((1,0)).
inline int local_residue(const TameLocalModel& m, const StarSet& star, const Cocycle& beta) {
    return star.point_of(beta(m.inertia_generator));
}

// Pullback of a global cocycle along T -> <Frob>; trivial on inertia, which
// is exactly the unramified condition at this place.
inline Cocycle localize_cocycle(const GammaGroup& gg, const LocalPlace& v,
                                const TameLocalModel& m, const Cocycle& sigma) {
    std::vector<int> vals(m.group.gamma().order());
    for (int k = 0; k < m.f; ++k) {
        int g = 0;
        for (int t = 0; t < k; ++t) g = gg.gamma().mul(g, v.frob);
        for (long long i = 0; i < m.e; ++i) vals[m.index(i, k)] = sigma(g);
    }
    return Cocycle{std::move(vals)};
}

// Lemma-level check at finite level: residues commute with twisting by a
// cocycle that is unramified at the place.  Exhausts Z^1 of the local model
// of the twist.
inline bool residue_twist_check(const GammaGroup& gg, const StarSet& star, const Cocycle& sigma,
                                const LocalPlace& v, const H1Options& opt = {}) {
    if (!sigma.valid_on(gg)) throw group_error("invalid global cocycle");
    GammaGroup tw = twist_group(gg, sigma);
    TameLocalModel mJ = tame_local_model(gg, v);
    TameLocalModel mTw = tame_local_model(tw, v);
    Cocycle sigma_loc = localize_cocycle(gg, v, mJ, sigma);
    for (long long i = 1; i < mJ.e; ++i)
        if (sigma_loc(mJ.index(i, 0)) != sigma_loc(mJ.index(0, 0)))
            throw group_error("cocycle ramified at the place");
    StarSet star_tw = build_star(tw);
    if (star_tw.action_table() != star.action_table())
        throw group_error("twisted star set differs from the original star set");
    for (const auto& alpha : cocycle_set(mTw.group, opt)) {
        // lambda_sigma(alpha) = alpha * sigma_loc, a cocycle for the
        // untwisted local model
        std::vector<int> vals(mJ.group.gamma().order());
        for (int t = 0; t < mJ.group.gamma().order(); ++t)
            vals[t] = gg.base().mul(alpha(t), sigma_loc(t));
        Cocycle lambda{std::move(vals)};
        if (!lambda.valid_on(mJ.group)) return false;
        if (local_residue(mJ, star, lambda) != local_residue(mTw, star_tw, alpha)) return false;
    }
    return true;
}

// Lemma-level check at finite level: the residue of a torsor pushed forward
// from an invariant subgroup is the pushforward of its residue.
inline bool residue_subgroup_check(const GammaGroup& gg, const StarSet& star,
                                   const std::vector<int>& subgroup_elements, const LocalPlace& v,
                                   const H1Options& opt = {}) {
    GammaSubgroup sub = gg.restrict_to(subgroup_elements);
    StarSet starR = build_star(sub.group);
    TameLocalModel mJ = tame_local_model(gg, v);
    TameLocalModel mR = tame_local_model(sub.group, v);
    // e(R) may be smaller than e(J); embed Z^1 of R's model by restriction
    // along T_J -> T_R, (i, k) -> (i mod e_R, k mod f_R).
    for (const auto& alpha : cocycle_set(mR.group, opt)) {
        std::vector<int> vals(mJ.group.gamma().order());
        for (int k = 0; k < mJ.f; ++k)
            for (long long i = 0; i < mJ.e; ++i)
                vals[mJ.index(i, k)] = sub.inclusion[alpha(mR.index(i % mR.e, k % mR.f))];
        Cocycle pushed{std::move(vals)};
        if (!pushed.valid_on(mJ.group)) return false;
        int lhs = local_residue(mJ, star, pushed);
        int rhs = star.point_of(sub.inclusion[starR.rep(local_residue(mR, starR, alpha))]);
        if (lhs != rhs) return false;
    }
    return true;
}

} // namespace torsorcount
