#pragma once

#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dirichlet.hpp"
#include "star.hpp"

namespace torsorcount {

enum class FamilyKind { Mu, Cyclic, Product };

// A built-in commutative family over Q: mu_m, the constant Z/m, or a finite
// product of constant cyclic groups.
struct FamilyDescriptor {
    FamilyKind kind = FamilyKind::Cyclic;
    std::vector<int> factors;  // {m} for Mu/Cyclic

    int m() const { return factors.at(0); }
    long long exponent() const {
        long long e = 1;
        for (int f : factors) e = std::lcm<long long>(e, f);
        return e;
    }
    std::string name() const {
        std::ostringstream os;
        if (kind == FamilyKind::Mu) os << "mu_" << m();
        else if (kind == FamilyKind::Cyclic) os << "cyclic_" << m();
        else {
            os << "product_";
            for (std::size_t i = 0; i < factors.size(); ++i)
                os << (i ? "x" : "") << factors[i];
        }
        return os.str();
    }

    static FamilyDescriptor mu(int m) { return {FamilyKind::Mu, {m}}; }
    static FamilyDescriptor cyclic(int m) { return {FamilyKind::Cyclic, {m}}; }
    static FamilyDescriptor product(std::vector<int> ms) {
        return {FamilyKind::Product, std::move(ms)};
    }

    // #G(Q): rational points of the group scheme
    long long g_of_q() const {
        if (kind == FamilyKind::Mu) return m() % 2 == 0 ? 2 : 1;
        long long n = 1;
        for (int f : factors) n *= f;
        return n;
    }
    // #G*(Q) of the Cartier dual
    long long g_star_of_q() const {
        if (kind == FamilyKind::Mu) return m();
        long long n = 1;
        for (int f : factors) n *= (f % 2 == 0 ? 2 : 1);
        return n;
    }
};

// The realized Galois-theoretic model of a family: Gamma = (Z/e)^x with the
// identity cyclotomic character, J the group of the family, and the star
// set with its action.  Move-only; the star set refers into the Gamma-group.
class QFamily {
public:
    static QFamily make(FamilyDescriptor d) {
        QFamily f;
        f.desc_ = d;
        long long e = d.exponent();
        f.e_ = e;
        FiniteGroup J = FiniteGroup::cyclic(d.factors[0]);
        for (std::size_t i = 1; i < d.factors.size(); ++i)
            J = FiniteGroup::direct_product(J, FiniteGroup::cyclic(d.factors[i]));
        for (long long u = 1; u < e; ++u)
            if (std::gcd(u, e) == 1) f.units_.push_back(u);
        if (e == 1) f.units_ = {1};
        int n = static_cast<int>(f.units_.size());
        std::map<long long, int> uidx;
        for (int i = 0; i < n; ++i) uidx[f.units_[i] % std::max<long long>(e, 1)] = i;
        std::vector<int> table(static_cast<std::size_t>(n) * n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                table[static_cast<std::size_t>(a) * n + b] =
                    e == 1 ? 0 : uidx.at(f.units_[a] * f.units_[b] % e);
        FiniteGroup U("(Z/" + std::to_string(e) + ")^x", std::move(table));
        std::vector<long long> chi(f.units_.begin(), f.units_.end());
        std::vector<std::vector<int>> action(n, std::vector<int>(J.order()));
        for (int g = 0; g < n; ++g)
            for (int j = 0; j < J.order(); ++j) {
                if (d.kind == FamilyKind::Mu) {
                    // multiplication by the cyclotomic character
                    action[g][j] = static_cast<int>((f.units_[g] % e) * j % e);
                } else {
                    action[g][j] = j;  // constant group
                }
            }
        f.gamma_ = std::make_unique<GammaGroup>(
            std::move(J), GaloisQuotient(std::move(U), std::max<long long>(e, 1), std::move(chi)),
            std::move(action));
        f.star_ = std::make_unique<StarSet>(*f.gamma_);
        return f;
    }

    const FamilyDescriptor& desc() const { return desc_; }
    const GammaGroup& gamma() const { return *gamma_; }
    const StarSet& star() const { return *star_; }
    long long e() const { return e_; }
    const std::vector<long long>& units() const { return units_; }

    int frob_index(long long p) const {
        long long r = ((p % e_) + e_) % e_;
        if (e_ == 1) return 0;
        for (std::size_t i = 0; i < units_.size(); ++i)
            if (units_[i] == r) return static_cast<int>(i);
        throw group_error("prime is not coprime to the family exponent");
    }

    LocalPlace place(long long p) const { return LocalPlace{p, frob_index(p), true}; }

    // componentwise tuple <-> star point (elements of the product group)
    std::vector<int> tuple_of_point(int pt) const {
        int el = star_->rep(pt);
        std::vector<int> out(desc_.factors.size());
        for (std::size_t i = desc_.factors.size(); i-- > 0;) {
            out[i] = el % desc_.factors[i];
            el /= desc_.factors[i];
        }
        return out;
    }
    int point_of_tuple(const std::vector<int>& vals) const {
        int el = 0;
        for (std::size_t i = 0; i < desc_.factors.size(); ++i)
            el = el * desc_.factors[i] + (vals[i] % desc_.factors[i]);
        return star_->point_of(el);
    }

    // nonidentity Frobenius-fixed star points at a tame prime: the possible
    // ramified residues, one global decoration each
    std::vector<int> ramified_residue_points(long long p) const {
        std::vector<int> out;
        int fr = frob_index(p);
        for (int pt = 1; pt < star_->size(); ++pt)
            if (star_->act(fr, pt) == pt) out.push_back(pt);
        return out;
    }

private:
    FamilyDescriptor desc_;
    std::unique_ptr<GammaGroup> gamma_;
    std::unique_ptr<StarSet> star_;
    long long e_ = 1;
    std::vector<long long> units_;
};

// Height data for enumeration over Q: the counting function on the family
// star set and the finite bad set, where the local height is identically 1.
struct HeightSpec {
    CountingFunction counting;
    std::set<long long> bad_primes;  // must contain every p | m

    bool is_bad(long long p) const { return bad_primes.count(p) != 0; }
};

inline void validate_height_spec(const QFamily& fam, const HeightSpec& h) {
    validate_counting(fam.star(), h.counting);
    for (int f : fam.desc().factors)
        for (long long p = 2; p <= f; ++p)
            if (f % p == 0 && is_prime(p) && !h.bad_primes.count(p))
                throw group_error("bad set must contain every prime dividing the group order");
}

// ---- torsor classes ------------------------------------------------------

// An element of Q^x/(Q^x)^m: a sign bit and exponents mod m at finitely
// many primes.
struct KummerClass {
    int m = 2;
    bool negative = false;
    std::map<long long, int> exponents;  // p -> 1..m-1

    void reduce() {
        if (m % 2 == 1) negative = false;  // -1 is an m-th power
        for (auto it = exponents.begin(); it != exponents.end();) {
            it->second = ((it->second % m) + m) % m;
            it = it->second == 0 ? exponents.erase(it) : std::next(it);
        }
    }

    std::string str() const {
        std::ostringstream os;
        if (negative) os << "-";
        bool first = true;
        for (auto& [p, e] : exponents) {
            os << (first ? "" : "*") << p << "^" << e;
            first = false;
        }
        if (first) os << "1";
        return os.str();
    }

    friend bool operator==(const KummerClass& a, const KummerClass& b) {
        return a.m == b.m && a.negative == b.negative && a.exponents == b.exponents;
    }
    friend bool operator<(const KummerClass& a, const KummerClass& b) {
        if (a.negative != b.negative) return !a.negative;
        return std::vector<std::pair<long long, int>>(a.exponents.begin(), a.exponents.end()) <
               std::vector<std::pair<long long, int>>(b.exponents.begin(), b.exponents.end());
    }
};

// Residue of a Kummer class at a tame prime p outside the bad set: the
// valuation mod m, a point of the (trivially acted on) star set Z/m.
inline int residue_of_kummer(const KummerClass& x, const HeightSpec& h, long long p) {
    if (h.is_bad(p) || x.m % p == 0) throw group_error("residue requested at a bad place");
    auto it = x.exponents.find(p);
    return it == x.exponents.end() ? 0 : ((it->second % x.m) + x.m) % x.m;
}

// A continuous character component at one prime: a character of Z_p^x with
// values in (1/m)Z/Z, materialized modulo p^K where K bounds the possible
// conductor of an order-dividing-m character.
struct LocalCharacter {
    long long p = 2;
    long long modulus = 1;    // p^K
    long long conductor = 1;  // p^k, k <= K
    int order = 1;
    std::vector<int> exps;    // exponents mod m on units mod p^K
};

// Every continuous character Z_p^x -> Z/m.  The list is finite: conductor
// exponents are bounded by v_p(m)+1 (odd p), v_2(m)+2 (p = 2), or 1 at
// primes not dividing m.  The trivial character comes first.
inline std::vector<LocalCharacter> local_characters(long long p, int m) {
    int vp = 0;
    long long t = m;
    while (t % p == 0) { t /= p; ++vp; }
    long long K = 1;
    int kexp = (p == 2) ? (m % 2 == 1 ? 1 : vp + 2) : vp + 1;
    for (int i = 0; i < kexp; ++i) K *= p;
    std::vector<LocalCharacter> out;
    for (const auto& chi : characters_mod(K, m)) {
        LocalCharacter lc;
        lc.p = p;
        lc.modulus = K;
        lc.conductor = chi.conductor();
        lc.order = chi.order();
        lc.exps.resize(static_cast<std::size_t>(K), 0);
        for (long long a = 0; a < K; ++a)
            if (chi.is_unit(a)) lc.exps[a] = chi.exponent(a);
        out.push_back(std::move(lc));
    }
    std::sort(out.begin(), out.end(), [](const LocalCharacter& a, const LocalCharacter& b) {
        if (a.conductor != b.conductor) return a.conductor < b.conductor;
        return a.exps < b.exps;
    });
    return out;
}

// A homomorphism Gamma_Q -> Z/m as a finite product of local components:
// at tame ramified primes the value on the smallest primitive root, at bad
// primes an index into the local character table.
struct CyclicTorsor {
    int m = 2;
    std::map<long long, int> tame;  // p -> a_p in 1..m-1 with ord(a_p) | p-1
    std::map<long long, int> bad;   // p -> index into local_characters(p, m)

    std::string str() const {
        std::ostringstream os;
        bool first = true;
        for (auto& [p, a] : tame) {
            os << (first ? "" : "*") << p << ":" << a;
            first = false;
        }
        for (auto& [p, j] : bad) {
            if (j == 0) continue;
            os << (first ? "" : "*") << p << "^loc" << j;
            first = false;
        }
        if (first) os << "1";
        return os.str();
    }

    long long tame_conductor() const {
        long long N = 1;
        for (auto& [p, a] : tame) N *= p;
        return N;
    }

    friend bool operator==(const CyclicTorsor& a, const CyclicTorsor& b) {
        return a.m == b.m && a.tame == b.tame && a.bad == b.bad;
    }
    friend bool operator<(const CyclicTorsor& a, const CyclicTorsor& b) {
        auto key = [](const CyclicTorsor& t) {
            std::vector<std::tuple<long long, int, int>> k;
            for (auto& [p, v] : t.tame) k.emplace_back(p, 0, v);
            for (auto& [p, v] : t.bad) k.emplace_back(p, 1, v);
            return k;
        };
        return key(a) < key(b);
    }
};

inline int additive_order(int a, int m) { return m / std::gcd(a, m); }

// Residue at a tame prime outside the bad set: the distinguished point when
// unramified, otherwise the component value as a point of (Z/m)_*.
inline int residue_of_character(const CyclicTorsor& t, const HeightSpec& h, long long p) {
    if (h.is_bad(p) || t.m % p == 0) throw group_error("residue requested at a bad place");
    auto it = t.tame.find(p);
    if (it == t.tame.end()) return 0;
    if ((p - 1) % additive_order(it->second, t.m) != 0)
        throw group_error("component order does not divide p - 1");
    return it->second;
}

// Pushforward along Z/d -> Z/m, a |-> (m/d) a; heights of pushed torsors
// match the pulled-back counting function on the subgroup.
inline CyclicTorsor pushforward(const CyclicTorsor& t, int m) {
    if (m % t.m != 0) throw group_error("pushforward needs d | m");
    CyclicTorsor out;
    out.m = m;
    int scale = m / t.m;
    for (auto& [p, a] : t.tame) out.tame[p] = a * scale;
    out.bad = t.bad;  // indices refer to the Z/d table; only orders are used
    return out;
}

// number of global classes supported entirely inside the bad set
inline long long bad_block_size(const QFamily& fam, const HeightSpec& h) {
    long long n = 1;
    for (long long p : h.bad_primes) {
        long long per_prime = 1;
        for (int f : fam.desc().factors) {
            if (fam.desc().kind == FamilyKind::Mu) per_prime *= f;
            else per_prime *= static_cast<long long>(local_characters(p, f).size());
        }
        n *= per_prime;
    }
    if (fam.desc().kind == FamilyKind::Mu && fam.desc().m() % 2 == 0) n *= 2;
    return n;
}

} // namespace torsorcount
