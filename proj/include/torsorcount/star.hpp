#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "galois.hpp"
#include "rational.hpp"

namespace torsorcount {

// The star set of a Gamma-group J: J-conjugacy classes of elements of J
// (each class is a class of homomorphisms mu_e -> J through evaluation at
// the fixed generator), carrying the twisted Galois action
// gamma * g = gamma(g)^(chi(gamma)^-1).  Point 0 is the class of the
// identity and every class is represented by its minimal element index.
class StarSet {
public:
    StarSet() = default;

    explicit StarSet(const GammaGroup& gg) : owner_(&gg) {
        const FiniteGroup& J = gg.base();
        long long e = J.exponent();
        if (gg.quotient().modulus() % e != 0)
            throw group_error("exponent of J does not divide the cyclotomic modulus");
        auto classes = J.conjugacy_classes();
        reps_.reserve(classes.size());
        point_of_.assign(J.order(), -1);
        for (std::size_t i = 0; i < classes.size(); ++i) {
            reps_.push_back(classes[i].front());
            for (int x : classes[i]) point_of_[x] = static_cast<int>(i);
        }
        int np = static_cast<int>(reps_.size());
        action_.assign(gg.gamma().order(), std::vector<int>(np));
        for (int g = 0; g < gg.gamma().order(); ++g) {
            long long u = mod_inverse(gg.quotient().cyclotomic_mod(g, e), e);
            for (const auto& cls : classes) {
                int image_pt = -1;
                for (int x : cls) {
                    int y = J.pow(gg.act(g, x), u);
                    int pt = point_of_[y];
                    if (image_pt < 0) image_pt = pt;
                    else if (image_pt != pt)
                        throw group_error("star action is not well defined on conjugacy classes");
                }
                action_[g][point_of_[cls.front()]] = image_pt;
            }
            if (action_[g][0] != 0)
                throw group_error("star action does not fix the distinguished point");
        }
    }

    const GammaGroup& owner() const { return *owner_; }
    int size() const { return static_cast<int>(reps_.size()); }
    int rep(int point) const { return reps_[point]; }
    int point_of(int element) const { return point_of_[element]; }
    int act(int gamma, int point) const { return action_[gamma][point]; }
    const std::vector<std::vector<int>>& action_table() const { return action_; }

    bool point_order_divides(int point, long long d) const {
        return owner_->base().element_order(reps_[point]) != 0 &&
               d % owner_->base().element_order(reps_[point]) == 0;
    }

    int point_order(int point) const { return owner_->base().element_order(reps_[point]); }

    // Galois orbits, each sorted, ordered by minimal point.
    std::vector<std::vector<int>> orbits() const {
        std::vector<char> seen(size(), 0);
        std::vector<std::vector<int>> out;
        for (int p = 0; p < size(); ++p) {
            if (seen[p]) continue;
            std::vector<int> orb{p};
            seen[p] = 1;
            for (std::size_t i = 0; i < orb.size(); ++i)
                for (int g = 0; g < owner_->gamma().order(); ++g) {
                    int q = act(g, orb[i]);
                    if (!seen[q]) { seen[q] = 1; orb.push_back(q); }
                }
            std::sort(orb.begin(), orb.end());
            out.push_back(std::move(orb));
        }
        return out;
    }

private:
    const GammaGroup* owner_ = nullptr;
    std::vector<int> reps_;
    std::vector<int> point_of_;
    std::vector<std::vector<int>> action_;
};

inline StarSet build_star(const GammaGroup& gg) { return StarSet(gg); }

// A Galois-invariant function on star points, zero exactly at the
// distinguished point.
struct CountingFunction {
    std::vector<Rational> values;  // indexed by star point

    const Rational& operator()(int point) const { return values[point]; }
};

inline void validate_counting(const StarSet& s, const CountingFunction& c) {
    if (static_cast<int>(c.values.size()) != s.size())
        throw group_error("counting function has wrong length");
    if (!c.values[0].is_zero()) throw group_error("counting function must vanish at the identity class");
    for (int p = 1; p < s.size(); ++p)
        if (!(Rational(0) < c.values[p]))
            throw group_error("counting function must be positive away from the identity class");
    for (int g = 0; g < s.owner().gamma().order(); ++g)
        for (int p = 0; p < s.size(); ++p)
            if (c.values[s.act(g, p)] != c.values[p])
                throw group_error("counting function is not Galois invariant");
}

// c_Delta: class of g |-> [J : <g>] * (ord(g) - 1).
inline CountingFunction c_discriminant(const StarSet& s) {
    const FiniteGroup& J = s.owner().base();
    CountingFunction c;
    c.values.resize(s.size());
    for (int p = 0; p < s.size(); ++p) {
        int g = s.rep(p);
        int ord = J.element_order(g);
        c.values[p] = Rational(static_cast<std::int64_t>(J.order() / ord) * (ord - 1));
    }
    validate_counting(s, c);
    return c;
}

// c_iota for a faithful transitive permutation representation of J of degree
// n: class of g |-> n - #orbits of g on {1..n}.
inline CountingFunction c_index(const StarSet& s) {
    const FiniteGroup& J = s.owner().base();
    if (!J.has_perm_rep()) throw group_error("c_index needs a permutation representation");
    if (!J.perm_rep_transitive()) throw group_error("c_index needs a transitive representation");
    CountingFunction c;
    c.values.resize(s.size());
    for (int p = 0; p < s.size(); ++p)
        c.values[p] = Rational(J.perm_degree() - J.perm_orbit_count(s.rep(p)));
    validate_counting(s, c);
    return c;
}

inline CountingFunction constant_counting(const StarSet& s, const Rational& v = Rational(1)) {
    CountingFunction c;
    c.values.assign(s.size(), v);
    c.values[0] = Rational(0);
    validate_counting(s, c);
    return c;
}

// Text format: lines "class <representative-index> value <p>/<q>", one per
// star point; indices refer to class representatives in J.
inline CountingFunction parse_counting(const StarSet& s, std::istream& in) {
    CountingFunction c;
    c.values.assign(s.size(), Rational(-1));
    c.values[0] = Rational(0);
    std::string kw1, kw2, val;
    int rep;
    while (in >> kw1 >> rep >> kw2 >> val) {
        if (kw1 != "class" || kw2 != "value") throw group_error("bad counting function line");
        if (rep < 0 || rep >= s.owner().base().order()) throw group_error("class index out of range");
        c.values[s.point_of(rep)] = Rational::parse(val);
    }
    for (int p = 1; p < s.size(); ++p)
        if (c.values[p] == Rational(-1))
            throw group_error("counting function missing a class value");
    validate_counting(s, c);
    return c;
}

struct MalleInvariants {
    Rational a;        // (min nonzero value of c)^-1
    long long b = 0;   // number of Galois orbits on the minimum locus
    Rational lambda;   // second-smallest normalized value, or 2 when absent
    std::vector<int> minimum_locus;  // star points attaining the minimum
};

inline MalleInvariants invariants(const StarSet& s, const CountingFunction& c) {
    validate_counting(s, c);
    if (s.size() < 2) throw group_error("invariants need a nontrivial group");
    Rational mn = c.values[1];
    for (int p = 1; p < s.size(); ++p) mn = std::min(mn, c.values[p]);
    MalleInvariants mi;
    mi.a = Rational(1) / mn;
    for (int p = 1; p < s.size(); ++p)
        if (c.values[p] == mn) mi.minimum_locus.push_back(p);
    // orbits on the minimum locus
    auto orbs = s.orbits();
    for (const auto& orb : orbs)
        if (orb[0] != 0 && c.values[orb[0]] == mn) ++mi.b;
    // second smallest normalized value
    Rational second(0);
    bool have_second = false;
    for (int p = 1; p < s.size(); ++p) {
        Rational norm = c.values[p] / mn;
        if (norm == Rational(1)) continue;
        if (!have_second || norm < second) { second = norm; have_second = true; }
    }
    mi.lambda = have_second ? second : Rational(2);
    return mi;
}

inline CountingFunction normalized(const StarSet& s, const CountingFunction& c) {
    auto mi = invariants(s, c);
    CountingFunction out;
    out.values.reserve(c.values.size());
    for (const auto& v : c.values) out.values.push_back(v * mi.a);
    validate_counting(s, out);
    return out;
}

// Pullback of a counting function along a Galois-equivariant injective
// homomorphism iota: R -> J, on elements: class of r |-> class of iota(r).
inline CountingFunction pullback(const StarSet& sJ, const CountingFunction& c,
                                 const StarSet& sR, const std::vector<int>& iota) {
    const FiniteGroup& R = sR.owner().base();
    const FiniteGroup& J = sJ.owner().base();
    if (static_cast<int>(iota.size()) != R.order()) throw group_error("inclusion map has wrong length");
    if (J.exponent() % R.exponent() != 0) throw group_error("e(R) must divide e(J)");
    std::vector<char> hit(J.order(), 0);
    for (int r = 0; r < R.order(); ++r) {
        if (hit[iota[r]]) throw group_error("inclusion map is not injective");
        hit[iota[r]] = 1;
    }
    for (int a = 0; a < R.order(); ++a)
        for (int b = 0; b < R.order(); ++b)
            if (iota[R.mul(a, b)] != J.mul(iota[a], iota[b]))
                throw group_error("inclusion map is not a homomorphism");
    if (sR.owner().gamma().order() != sJ.owner().gamma().order())
        throw group_error("inclusion must live over the same Galois quotient");
    for (int g = 0; g < sR.owner().gamma().order(); ++g)
        for (int r = 0; r < R.order(); ++r)
            if (iota[sR.owner().act(g, r)] != sJ.owner().act(g, iota[r]))
                throw group_error("inclusion map is not Galois equivariant");
    CountingFunction out;
    out.values.resize(sR.size());
    for (int p = 0; p < sR.size(); ++p)
        out.values[p] = c.values[sJ.point_of(iota[sR.rep(p)])];
    validate_counting(sR, out);
    return out;
}

// ---- breaking-thin scan -------------------------------------------------

struct ScanRow {
    int sigma_id = 0;
    int subgroup_id = 0;
    Rational a;
    long long b = 0;
    bool breaking = false;
};

struct ScanReport {
    MalleInvariants base;
    std::vector<ScanRow> rows;       // lexicographic in (sigma_id, subgroup_id)
    bool any_breaking = false;
    std::string quotient;            // which finite quotient the scan covered

    std::string csv() const {
        std::ostringstream os;
        os << "sigma_id,subgroup_id,a,b,breaking\n";
        for (const auto& r : rows)
            os << r.sigma_id << ',' << r.subgroup_id << ',' << r.a.str() << ',' << r.b << ','
               << (r.breaking ? "true" : "false") << '\n';
        return os.str();
    }
};

// For every cocycle class sigma and every invariant subgroup R of the
// sigma-twist, compares (a, b) of the pulled-back counting function with the
// base invariants.  Uses the identification of the twist's star set with the
// original one, which is also asserted.
inline ScanReport breaking_thin_scan(const GammaGroup& gg, const StarSet& s,
                                     const CountingFunction& c, const H1Options& opt = {}) {
    validate_counting(s, c);
    ScanReport rep;
    rep.base = invariants(s, c);
    rep.quotient = "Gamma order " + std::to_string(gg.gamma().order()) + " acting on " +
                   gg.base().name();
    auto sigmas = h1_classes(gg, opt);
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
        GammaGroup tw = twist_group(gg, sigmas[si]);
        StarSet tw_star = build_star(tw);
        if (tw_star.action_table() != s.action_table())
            throw group_error("twisted star set differs from the original star set");
        auto subs = tw.invariant_subgroups();
        for (std::size_t ri = 0; ri < subs.size(); ++ri) {
            if (subs[ri].size() <= 1) continue;  // trivial subgroup has no invariants
            GammaSubgroup sub = tw.restrict_to(subs[ri]);
            StarSet sR = build_star(sub.group);
            // the inclusion is equivariant into the twist, whose star set
            // was just checked to coincide with the original one
            CountingFunction cR = pullback(tw_star, c, sR, sub.inclusion);
            auto mi = invariants(sR, cR);
            ScanRow row;
            row.sigma_id = static_cast<int>(si);
            row.subgroup_id = static_cast<int>(ri);
            row.a = mi.a;
            row.b = mi.b;
            row.breaking = (mi.a > rep.base.a) ||
                           (mi.a == rep.base.a && mi.b > rep.base.b);
            rep.any_breaking = rep.any_breaking || row.breaking;
            rep.rows.push_back(row);
        }
    }
    if (gg.base().is_abelian() && rep.any_breaking)
        throw group_error("abelian group produced a breaking thin map");
    return rep;
}

} // namespace torsorcount
