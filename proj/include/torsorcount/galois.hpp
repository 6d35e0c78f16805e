#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "finite_group.hpp"

namespace torsorcount {

inline long long mod_pow(long long b, long long e, long long m) {
    long long r = 1 % m;
    b %= m;
    if (b < 0) b += m;
    while (e > 0) {
        if (e & 1) r = (__int128(r) * b) % m;
        b = (__int128(b) * b) % m;
        e >>= 1;
    }
    return r;
}

inline long long mod_inverse(long long a, long long m) {
    long long g = m, x = 0, x1 = 1, a1 = a % m;
    if (a1 < 0) a1 += m;
    while (a1 != 0) {
        long long q = g / a1;
        g -= q * a1; std::swap(g, a1);
        x -= q * x1; std::swap(x, x1);
    }
    if (g != 1) throw std::domain_error("not invertible mod m");
    return ((x % m) + m) % m;
}

// A finite quotient of an absolute Galois group: the group itself, the mod-M
// cyclotomic character, and which global field it is a quotient for.
struct FieldDescriptor {
    std::string label = "Q";      // number field label or function field label
    bool function_field = false;
    long long constant_field_size = 0;  // q, function-field case only
};

class GaloisQuotient {
public:
    GaloisQuotient() = default;
    GaloisQuotient(FiniteGroup group, long long modulus, std::vector<long long> cyclotomic,
                   FieldDescriptor field = {})
        : group_(std::move(group)), modulus_(modulus), cyclotomic_(std::move(cyclotomic)),
          field_(std::move(field)) {
        if (static_cast<int>(cyclotomic_.size()) != group_.order())
            throw group_error("cyclotomic character has wrong length");
        for (auto& v : cyclotomic_) {
            v %= modulus_;
            if (v < 0) v += modulus_;
            if (std::gcd(v, modulus_) != 1) throw group_error("cyclotomic value is not a unit");
        }
        if (cyclotomic_[0] != 1 % modulus_) throw group_error("cyclotomic must send identity to 1");
        for (int a = 0; a < group_.order(); ++a)
            for (int b = 0; b < group_.order(); ++b)
                if (cyclotomic_[group_.mul(a, b)] !=
                    (__int128(cyclotomic_[a]) * cyclotomic_[b]) % modulus_)
                    throw group_error("cyclotomic character is not a homomorphism");
    }

    const FiniteGroup& group() const { return group_; }
    long long modulus() const { return modulus_; }
    long long cyclotomic(int g) const { return cyclotomic_[g]; }
    long long cyclotomic_mod(int g, long long e) const { return cyclotomic_[g] % e; }
    const FieldDescriptor& field() const { return field_; }

    static GaloisQuotient trivial(long long modulus = 1, FieldDescriptor field = {}) {
        return GaloisQuotient(FiniteGroup::cyclic(1), modulus, {1 % modulus}, std::move(field));
    }

private:
    FiniteGroup group_;
    long long modulus_ = 1;
    std::vector<long long> cyclotomic_;
    FieldDescriptor field_;
};

// A finite group J with an action of a Galois quotient by automorphisms.
class GammaGroup {
public:
    GammaGroup() = default;

    // action[gamma][j] = gamma(j)
    GammaGroup(FiniteGroup base, GaloisQuotient quotient, std::vector<std::vector<int>> action)
        : base_(std::move(base)), quotient_(std::move(quotient)), action_(std::move(action)) {
        validate();
    }

    const FiniteGroup& base() const { return base_; }
    const GaloisQuotient& quotient() const { return quotient_; }
    const FiniteGroup& gamma() const { return quotient_.group(); }
    int act(int g, int j) const { return action_[g][j]; }
    const std::vector<std::vector<int>>& action() const { return action_; }

    long long exhaustive_cost() const {
        return static_cast<long long>(gamma().order()) * base_.order();
    }

    static GammaGroup trivial_action(FiniteGroup base, GaloisQuotient quotient) {
        std::vector<int> id(base.order());
        std::iota(id.begin(), id.end(), 0);
        std::vector<std::vector<int>> action(quotient.group().order(), id);
        return GammaGroup(std::move(base), std::move(quotient), std::move(action));
    }

    bool action_is_trivial() const {
        for (const auto& p : action_)
            for (int j = 0; j < base_.order(); ++j)
                if (p[j] != j) return false;
        return true;
    }

    // Subgroups of J closed under the Galois action, sorted by (size, elements).
    std::vector<std::vector<int>> invariant_subgroups() const {
        std::vector<std::vector<int>> out;
        for (auto& sub : base_.all_subgroups()) {
            bool closed = true;
            std::set<int> s(sub.begin(), sub.end());
            for (int g = 0; g < gamma().order() && closed; ++g)
                for (int j : sub)
                    if (!s.count(act(g, j))) { closed = false; break; }
            if (closed) out.push_back(sub);
        }
        return out;
    }

    // Defined after GammaSubgroup below.
    struct GammaSubgroup restrict_to(const std::vector<int>& elements) const;

private:
    void validate() const {
        if (static_cast<int>(action_.size()) != gamma().order())
            throw group_error("action table has wrong number of rows");
        if (base_.exponent() != 0 && quotient_.modulus() % base_.exponent() != 0)
            throw group_error("exponent of J must divide the cyclotomic modulus");
        for (int g = 0; g < gamma().order(); ++g) {
            const auto& p = action_[g];
            if (static_cast<int>(p.size()) != base_.order())
                throw group_error("action row has wrong length");
            std::vector<char> hit(base_.order(), 0);
            for (int x : p) {
                if (x < 0 || x >= base_.order() || hit[x]) throw group_error("action is not bijective");
                hit[x] = 1;
            }
            if (p[0] != 0) throw group_error("action does not fix the identity");
            for (int a = 0; a < base_.order(); ++a)
                for (int b = 0; b < base_.order(); ++b)
                    if (p[base_.mul(a, b)] != base_.mul(p[a], p[b]))
                        throw group_error("action is not by automorphisms");
        }
        for (int g = 0; g < gamma().order(); ++g)
            for (int h = 0; h < gamma().order(); ++h) {
                int gh = gamma().mul(g, h);
                for (int j = 0; j < base_.order(); ++j)
                    if (action_[gh][j] != action_[g][action_[h][j]])
                        throw group_error("action is not a homomorphism into Aut(J)");
            }
    }

    FiniteGroup base_;
    GaloisQuotient quotient_;
    std::vector<std::vector<int>> action_;
};

// A Gamma-group structure on an invariant subgroup of J (elements reindexed
// in increasing J-index order, so the identity stays at index 0), together
// with the inclusion map into J.
struct GammaSubgroup {
    GammaGroup group;
    std::vector<int> inclusion;  // subgroup index -> J index
};

inline GammaSubgroup GammaGroup::restrict_to(const std::vector<int>& elements) const {
    std::vector<int> incl = elements;
    std::sort(incl.begin(), incl.end());
    if (incl.empty() || incl[0] != 0) throw group_error("subgroup must contain the identity");
    std::vector<int> pos(base_.order(), -1);
    for (std::size_t i = 0; i < incl.size(); ++i) pos[incl[i]] = static_cast<int>(i);
    int k = static_cast<int>(incl.size());
    std::vector<int> table(static_cast<std::size_t>(k) * k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            int p = base_.mul(incl[a], incl[b]);
            if (pos[p] < 0) throw group_error("element set is not closed under multiplication");
            table[static_cast<std::size_t>(a) * k + b] = pos[p];
        }
    std::vector<std::vector<int>> action(gamma().order(), std::vector<int>(k));
    for (int g = 0; g < gamma().order(); ++g)
        for (int a = 0; a < k; ++a) {
            int img = act(g, incl[a]);
            if (pos[img] < 0) throw group_error("element set is not Galois invariant");
            action[g][a] = pos[img];
        }
    FiniteGroup sub(base_.name() + "-sub" + std::to_string(k), std::move(table));
    return GammaSubgroup{GammaGroup(std::move(sub), quotient_, std::move(action)), std::move(incl)};
}

// A 1-cocycle on the Galois quotient with values in J:
// f(gamma delta) = f(gamma) * (gamma . f(delta)).
struct Cocycle {
    std::vector<int> values;  // indexed by Gamma element

    int operator()(int g) const { return values[g]; }

    bool valid_on(const GammaGroup& gg) const {
        if (static_cast<int>(values.size()) != gg.gamma().order()) return false;
        if (values[0] != 0) return false;
        for (int g = 0; g < gg.gamma().order(); ++g)
            for (int h = 0; h < gg.gamma().order(); ++h)
                if (values[gg.gamma().mul(g, h)] !=
                    gg.base().mul(values[g], gg.act(g, values[h])))
                    return false;
        return true;
    }

    static Cocycle trivial(const GammaGroup& gg) {
        return Cocycle{std::vector<int>(gg.gamma().order(), 0)};
    }
};

namespace detail {

// Small generating set of a finite group, greedily chosen.
inline std::vector<int> generating_set(const FiniteGroup& G) {
    std::vector<int> gens;
    std::vector<int> span{0};
    while (static_cast<int>(span.size()) < G.order()) {
        int next = -1;
        std::set<int> in(span.begin(), span.end());
        for (int g = 0; g < G.order(); ++g)
            if (!in.count(g)) { next = g; break; }
        gens.push_back(next);
        span = G.generated_subgroup(gens);
    }
    return gens;
}

} // namespace detail

struct H1Options {
    long long budget = 10000;  // reject inputs with |Gamma|*|J| beyond this
};

// All cocycles in Z^1(Gamma, J), enumerated by backtracking on generator
// images and propagating through the cocycle law.  The trivial cocycle is
// listed first; the rest follow in lexicographic order of their value vectors.
inline std::vector<Cocycle> cocycle_set(const GammaGroup& gg, const H1Options& opt = {}) {
    if (gg.exhaustive_cost() > opt.budget)
        throw resource_error("cocycle enumeration exceeds the configured budget");
    const FiniteGroup& M = gg.gamma();
    const FiniteGroup& J = gg.base();
    std::vector<int> gens = detail::generating_set(M);
    int ng = static_cast<int>(gens.size());

    // BFS expressions: each non-identity element reached as prev * gen.
    struct Step { int prev, gen; };
    std::vector<Step> how(M.order(), Step{-1, -1});
    std::vector<int> order_of_discovery{0};
    {
        std::vector<char> seen(M.order(), 0);
        seen[0] = 1;
        for (std::size_t i = 0; i < order_of_discovery.size(); ++i)
            for (int k = 0; k < ng; ++k) {
                int nxt = M.mul(order_of_discovery[i], gens[k]);
                if (!seen[nxt]) {
                    seen[nxt] = 1;
                    how[nxt] = Step{order_of_discovery[i], k};
                    order_of_discovery.push_back(nxt);
                }
            }
    }

    std::vector<Cocycle> out;
    std::vector<int> images(ng, 0);
    std::vector<int> f(M.order(), 0);
    auto attempt = [&]() {
        // f(prev*gen) = f(prev) * (prev . f(gen))
        for (int idx : order_of_discovery) {
            if (idx == 0) { f[0] = 0; continue; }
            f[idx] = J.mul(f[how[idx].prev], gg.act(how[idx].prev, images[how[idx].gen]));
        }
        for (int a = 0; a < M.order(); ++a)
            for (int b = 0; b < M.order(); ++b)
                if (f[M.mul(a, b)] != J.mul(f[a], gg.act(a, f[b]))) return;
        out.push_back(Cocycle{f});
    };
    // odometer over generator images
    while (true) {
        attempt();
        int pos = ng - 1;
        while (pos >= 0 && images[pos] == J.order() - 1) { images[pos] = 0; --pos; }
        if (pos < 0) break;
        ++images[pos];
    }
    std::sort(out.begin(), out.end(),
              [](const Cocycle& a, const Cocycle& b) { return a.values < b.values; });
    return out;
}

// One representative per class of Z^1 modulo f ~ f' <=> exists k with
// f'(gamma) = k^-1 f(gamma) (gamma . k).  The class of the trivial cocycle
// comes first; later classes follow their minimal representative's order.
inline std::vector<Cocycle> h1_classes(const GammaGroup& gg, const H1Options& opt = {}) {
    auto all = cocycle_set(gg, opt);
    const FiniteGroup& M = gg.gamma();
    const FiniteGroup& J = gg.base();
    std::set<std::vector<int>> seen;
    std::vector<Cocycle> reps;
    for (const auto& f : all) {
        if (seen.count(f.values)) continue;
        reps.push_back(f);
        for (int k = 0; k < J.order(); ++k) {
            std::vector<int> g(M.order());
            for (int m = 0; m < M.order(); ++m)
                g[m] = J.mul(J.mul(J.inv(k), f.values[m]), gg.act(m, k));
            seen.insert(std::move(g));
        }
    }
    return reps;
}

// Size of the Z^1-fiber over the class of f (the orbit of f under the
// coboundary action); it divides |J|.
inline int cocycle_class_fiber_size(const GammaGroup& gg, const Cocycle& f) {
    const FiniteGroup& M = gg.gamma();
    const FiniteGroup& J = gg.base();
    std::set<std::vector<int>> orbit;
    for (int k = 0; k < J.order(); ++k) {
        std::vector<int> g(M.order());
        for (int m = 0; m < M.order(); ++m)
            g[m] = J.mul(J.mul(J.inv(k), f.values[m]), gg.act(m, k));
        orbit.insert(std::move(g));
    }
    return static_cast<int>(orbit.size());
}

// Twist of the Galois action by a cocycle: gamma ._sigma j =
// sigma(gamma) (gamma . j) sigma(gamma)^-1.  Same underlying group.
inline GammaGroup twist_group(const GammaGroup& gg, const Cocycle& sigma) {
    if (!sigma.valid_on(gg)) throw group_error("twist by an invalid cocycle");
    const FiniteGroup& J = gg.base();
    std::vector<std::vector<int>> action(gg.gamma().order(), std::vector<int>(J.order()));
    for (int g = 0; g < gg.gamma().order(); ++g) {
        int s = sigma(g);
        for (int j = 0; j < J.order(); ++j)
            action[g][j] = J.mul(J.mul(s, gg.act(g, j)), J.inv(s));
    }
    return GammaGroup(gg.base(), gg.quotient(), std::move(action));
}

// Lambda_sigma: Z^1(M, twist) -> Z^1(M, J), beta |-> beta * sigma (pointwise).
inline Cocycle twist_bijection(const GammaGroup& gg, const Cocycle& sigma, const Cocycle& beta) {
    if (!sigma.valid_on(gg)) throw group_error("twist_bijection: invalid sigma");
    GammaGroup tw = twist_group(gg, sigma);
    if (!beta.valid_on(tw)) throw group_error("twist_bijection: beta is not a cocycle on the twist");
    std::vector<int> vals(gg.gamma().order());
    for (int g = 0; g < gg.gamma().order(); ++g) vals[g] = gg.base().mul(beta(g), sigma(g));
    Cocycle out{std::move(vals)};
    if (!out.valid_on(gg)) throw group_error("twist_bijection produced an invalid cocycle");
    return out;
}

} // namespace torsorcount
