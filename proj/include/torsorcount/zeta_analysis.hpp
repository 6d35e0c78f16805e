#pragma once

#include <complex>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dirichlet.hpp"
#include "enumerate.hpp"
#include "qfamily.hpp"

namespace torsorcount {

// Global arithmetic invariants entering the leading constant; users may
// override the built-in defaults (correct for the shipped families away
// from the classical exceptional case 8 | m, see README).
struct ArithmeticInputs {
    long long sha1 = 1;
    long long sha2 = 1;
    long long gF = 1;      // #G(Q)
    long long gStarF = 1;  // #G*(Q)
    std::string source = "built-in default";

    static ArithmeticInputs defaults_for(const FamilyDescriptor& d) {
        ArithmeticInputs in;
        in.gF = d.g_of_q();
        in.gStarF = d.g_star_of_q();
        return in;
    }
};

// tau_BG = #G*(F) / #Sha^2(G)
inline Rational tamagawa_constant(const ArithmeticInputs& in) {
    if (in.gStarF <= 0 || in.sha2 <= 0 || in.gF <= 0 || in.sha1 <= 0)
        throw group_error("arithmetic inputs must be positive");
    return Rational(in.gStarF, in.sha2);
}

// ---- global dual characters ------------------------------------------------

// An element of the dual support: a Dirichlet character for mu families, a
// tuple of Kummer classes for cyclic and product families.
struct GlobalCharacter {
    bool dirichlet = false;
    DirichletCharacter dir;
    std::vector<KummerClass> kummer;

    bool trivial() const {
        if (dirichlet) return dir.order() == 1;
        for (const auto& k : kummer)
            if (!k.exponents.empty() || k.negative) return false;
        return true;
    }

    std::string str() const {
        if (!dirichlet) {
            std::string s;
            for (const auto& k : kummer) s += (s.empty() ? "" : ",") + k.str();
            return "kummer(" + s + ")";
        }
        std::ostringstream os;
        os << "dirichlet(mod " << dir.conductor() << ", order " << dir.order() << ")";
        return os.str();
    }
};

struct CharacterSupport {
    std::vector<GlobalCharacter> characters;  // trivial character first
};

namespace detail {

// x an m-th power in Q_p^x, tested at Hensel-sufficient precision.
inline bool is_mth_power_in_qp(const KummerClass& x, long long p) {
    int m = x.m;
    auto it = x.exponents.find(p);
    int vp = it == x.exponents.end() ? 0 : it->second;
    if (vp % m != 0) return false;
    int vm = 0;
    long long t = m;
    while (t % p == 0) { t /= p; ++vm; }
    long long K = 1;
    int kexp = (p == 2) ? 2 * vm + 3 : 2 * vm + 1;
    for (int i = 0; i < kexp; ++i) K *= p;
    long long u = x.negative ? K - 1 : 1;
    for (auto& [q, e] : x.exponents) {
        if (q == p) continue;
        u = (u * mod_pow(q % K, e, K)) % K;
    }
    for (long long y = 1; y < K; ++y) {
        if (y % p == 0) continue;
        if (mod_pow(y, m, K) == u) return true;
    }
    return false;
}

inline bool is_rational_square(const KummerClass& x) {
    if (x.negative) return false;
    for (auto& [p, e] : x.exponents)
        if (e % x.m != 0) return false;
    return true;
}

// Discrete log of the power residue symbol (x/p)_d against the
// smallest-primitive-root convention; needs d | p-1 and p coprime to x.
inline int power_residue_dlog(const KummerClass& x, long long p, int d) {
    if ((p - 1) % d != 0) throw group_error("symbol needs d | p - 1");
    long long g = smallest_primitive_root(p);
    long long zeta = mod_pow(g, (p - 1) / d, p);
    long long xv = x.negative ? p - 1 : 1;
    for (auto& [q, e] : x.exponents) xv = (xv * mod_pow(q % p, e, p)) % p;
    if (xv == 0) throw group_error("symbol at a prime dividing the class");
    long long target = mod_pow(xv, (p - 1) / d, p);
    long long acc = 1;
    for (int k = 0; k < d; ++k) {
        if (acc == target) return k;
        acc = (acc * zeta) % p;
    }
    throw group_error("power residue symbol did not close");
}

// pairing exponent of a support character against a Frobenius-fixed star
// point at a tame prime, in Z/e
inline long long pairing_exponent(const QFamily& fam, const GlobalCharacter& chi, long long p,
                                  int point) {
    long long e = fam.e();
    if (point == 0) return 0;
    if (chi.dirichlet) {
        long long m = fam.desc().m();
        if (chi.dir.conductor() % p == 0) throw group_error("character ramified at the place");
        long long cexp = chi.dir.primitive_exponent(p);
        long long phi = fam.star().rep(point);
        return (cexp * phi) % m * (e / m);
    }
    auto tuple = fam.tuple_of_point(point);
    long long acc = 0;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (tuple[i] == 0) continue;
        int mi = fam.desc().factors[i];
        int d = mi / std::gcd(tuple[i], mi);
        if ((p - 1) % d != 0) throw group_error("pairing at a non-fixed point");
        int s = power_residue_dlog(chi.kummer[i], p, d);
        long long k_scaled = tuple[i] / (mi / d);
        acc = (acc + (e / d) * ((static_cast<long long>(s) * k_scaled) % d)) % e;
    }
    return acc;
}

// Does the monomial representation on the Galois orbit of `point` contain
// the trivial character (i.e. is the induced orbit character trivial)?
// nullopt: could not be certified either way.
inline std::optional<bool> orbit_contributes(const QFamily& fam, const GlobalCharacter& chi,
                                             int point) {
    if (chi.trivial()) return true;
    long long e = fam.e();
    if (chi.dirichlet) {
        long long m = fam.desc().m();
        long long phi = fam.star().rep(point);
        for (long long a = 1; a < chi.dir.modulus(); ++a) {
            if (!chi.dir.is_unit(a)) continue;
            if ((chi.dir.exponent(a) * phi) % m != 0) return false;
        }
        return true;
    }
    int d = fam.star().point_order(point);
    auto tuple = fam.tuple_of_point(point);
    bool involved = false;
    for (std::size_t i = 0; i < tuple.size(); ++i)
        if (tuple[i] != 0 && (!chi.kummer[i].exponents.empty() || chi.kummer[i].negative))
            involved = true;
    if (!involved) return true;
    if (d == 2) {
        // stabilizer field is Q itself; the induced character is the
        // quadratic character of an explicit rational
        KummerClass t{2, false, {}};
        for (std::size_t i = 0; i < tuple.size(); ++i) {
            if (tuple[i] == 0) continue;
            const auto& k = chi.kummer[i];
            if (k.negative) t.negative = !t.negative;
            for (auto& [q, ex] : k.exponents)
                if (ex % 2) t.exponents[q] = (t.exponents[q] + 1) % 2;
        }
        t.reduce();
        return is_rational_square(t);
    }
    // sample Frobenius elements in the stabilizer: any nonzero symbol
    // certifies non-contribution
    for (long long p = 2; p < 20000; ++p) {
        if (!is_prime(p) || (p - 1) % e != 0) continue;
        bool divides = false;
        for (const auto& k : chi.kummer)
            if (k.exponents.count(p)) divides = true;
        if (divides) continue;
        if (pairing_exponent(fam, chi, p, point) != 0) return false;
    }
    return std::nullopt;
}

inline std::vector<int> orbit_cycle_lengths(const StarSet& star, const std::vector<int>& points,
                                            int fr) {
    std::vector<char> seen(points.size(), 0);
    std::vector<int> lens;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (seen[i]) continue;
        int len = 0;
        int pt = points[i];
        do {
            auto it = std::lower_bound(points.begin(), points.end(), pt);
            seen[static_cast<std::size_t>(it - points.begin())] = 1;
            ++len;
            pt = star.act(fr, pt);
        } while (pt != points[i]);
        lens.push_back(len);
    }
    return lens;
}

inline long long unit_group_exponent(long long M) {
    if (M <= 2) return 1;
    long long ex = 1;
    for (long long a = 1; a < M; ++a) {
        if (std::gcd(a, M) != 1) continue;
        long long o = 1, x = a;
        while (x != 1) { x = x * a % M; ++o; }
        ex = std::lcm(ex, o);
    }
    return ex;
}

} // namespace detail

// Dual classes unramified outside the bad set (and the listed extra places)
// whose local components at the bad set annihilate the local height
// kernels.  With the built-in tables (H_v = 1 on the bad set) the kernel is
// everything, so the condition is local triviality; places named in
// `free_places` ("2", "7", "inf") carry no condition (K_{H_v} = {1}).
inline CharacterSupport character_support(const QFamily& fam, const HeightSpec& h,
                                          const std::set<std::string>& free_places = {},
                                          const std::set<long long>& extra_places = {}) {
    CharacterSupport out;
    auto free_at = [&](long long p) { return free_places.count(std::to_string(p)) != 0; };
    bool free_inf = free_places.count("inf") != 0;
    std::set<long long> places = h.bad_primes;
    for (long long p : extra_places) places.insert(p);

    if (fam.desc().kind == FamilyKind::Mu) {
        int m = fam.desc().m();
        long long Q = 1;
        for (long long p : places) {
            int vp = 0;
            long long t = m;
            while (t % p == 0) { t /= p; ++vp; }
            int kexp = (p == 2) ? (m % 2 == 1 ? 1 : vp + 2) : vp + 1;
            for (int i = 0; i < kexp; ++i) Q *= p;
        }
        for (const auto& chi : characters_mod(Q, m)) {
            bool ok = true;
            for (long long p : places) {
                if (free_at(p) || !h.is_bad(p)) continue;
                bool unram = chi.conductor() % p != 0;
                bool frob_trivial =
                    unram && std::abs(chi.primitive_value(p) - std::complex<double>(1.0)) < 1e-9;
                if (!frob_trivial) ok = false;
            }
            if (!free_inf && !chi.even()) ok = false;
            if (ok) out.characters.push_back(GlobalCharacter{true, chi, {}});
        }
    } else {
        std::vector<std::vector<KummerClass>> per_factor;
        for (int mi : fam.desc().factors) {
            std::vector<KummerClass> cands{KummerClass{mi, false, {}}};
            for (long long p : places) {
                std::vector<KummerClass> next;
                for (const auto& k : cands)
                    for (int e = 0; e < mi; ++e) {
                        KummerClass k2 = k;
                        if (e) k2.exponents[p] = e;
                        next.push_back(k2);
                    }
                cands = next;
            }
            if (mi % 2 == 0) {
                std::vector<KummerClass> next;
                for (const auto& k : cands)
                    for (bool neg : {false, true}) {
                        KummerClass k2 = k;
                        k2.negative = neg;
                        next.push_back(k2);
                    }
                cands = next;
            }
            per_factor.push_back(std::move(cands));
        }
        std::vector<GlobalCharacter> tuples{GlobalCharacter{false, {}, {}}};
        for (auto& cands : per_factor) {
            std::vector<GlobalCharacter> next;
            for (const auto& t : tuples)
                for (const auto& k : cands) {
                    GlobalCharacter t2 = t;
                    t2.kummer.push_back(k);
                    next.push_back(t2);
                }
            tuples = next;
        }
        for (const auto& t : tuples) {
            bool ok = true;
            for (const auto& k : t.kummer) {
                for (long long p : places) {
                    if (free_at(p) || !h.is_bad(p)) continue;
                    if (!detail::is_mth_power_in_qp(k, p)) ok = false;
                }
                if (!free_inf && k.m % 2 == 0 && k.negative) ok = false;
            }
            if (ok) out.characters.push_back(t);
        }
    }
    std::stable_sort(out.characters.begin(), out.characters.end(),
                     [](const GlobalCharacter& a, const GlobalCharacter& b) {
                         return a.trivial() && !b.trivial();
                     });
    if (out.characters.empty() || !out.characters.front().trivial())
        throw group_error("support must contain the trivial character");
    return out;
}

// ---- analytic engine --------------------------------------------------------

struct ZetaOptions {
    long long truncation = 1000000;  // Euler product cutoff
    double tolerance = 1e-5;         // acceptable relative tail bound
    bool signal_tail = true;         // throw when the tail bound exceeds it
};

struct CharacterContribution {
    std::string name;
    int fixed_dim = 0;
    bool contributes = false;
    std::complex<double> value;
};

struct ZetaResult {
    Rational a;
    long long b = 0;
    Rational lambda;
    Rational tau_bg;
    double omega = 0;           // omega_H(U); tau_H when U is everything
    double count_constant = 0;  // gF sha2 omega / (gStarF (b-1)!)
    double kappa = 0;           // second-order log shift (b = 2)
    bool kappa_exact = false;
    double tail_bound = 0;
    long long truncation = 0;
    std::string quotient;
    std::vector<CharacterContribution> per_character;

    // predicted number of torsors of height <= B (unweighted)
    double predicted_count(double B) const {
        double av = a.to_double();
        if (b == 1) return count_constant * std::pow(B, av);
        double lead = av * std::log(B);
        if (b == 2 && kappa_exact)
            return count_constant * std::pow(B, av) * (lead + kappa);
        double poly = 1;
        for (long long j = 0; j < b - 1; ++j) poly *= lead;
        return count_constant * std::pow(B, av) * poly;
    }
};

// mass of the full local torsor space at a finite place:
// #H^1(Q_p, G) / #G(Q_p)
inline Rational local_total_mass(const QFamily& fam, long long p) {
    Rational mass(1);
    for (int mi : fam.desc().factors) {
        long long h1 = static_cast<long long>(local_characters(p, mi).size()) * mi;
        long long g = fam.desc().kind == FamilyKind::Mu
                          ? std::gcd<long long>(mi, p == 2 ? 2 : p - 1)
                          : mi;
        mass = mass * Rational(h1, g);
    }
    return mass;
}

inline Rational local_infinite_mass(const QFamily& fam) {
    Rational mass(1);
    for (int mi : fam.desc().factors) {
        long long h1 = mi % 2 == 0 ? 2 : 1;  // #(R^x / (R^x)^m) resp. #Hom(Gal(C/R), Z/m)
        long long g = fam.desc().kind == FamilyKind::Mu ? (mi % 2 == 0 ? 2 : 1) : mi;
        mass = mass * Rational(h1, g);
    }
    return mass;
}

// The analytic computation behind predictions: omega_H of the elementary
// open set cut out by residue conditions at finitely many tame places
// (empty conditions = the whole space, giving tau_H).  Per character the
// factorization H^(s,chi) = (bad factors) (condition integrals)
// L^S(s, rho^{W1}_chi) R_chi(s) is evaluated at its order-b(c) pole:
// characters whose fixed subspace is smaller than b(c) contribute zero and
// are skipped symbolically; for the rest the L-leading coefficient comes
// from the Dedekind zeta of Q and closed-form L(1, psi) values, and the
// remainder R_chi(1) from a truncated Euler product with a class-by-class
// prime tail correction.
inline ZetaResult zeta_measure(const QFamily& fam, const HeightSpec& h,
                               const ArithmeticInputs& inputs, const CharacterSupport& support,
                               const LocalConditions& conditions, const ZetaOptions& opt = {}) {
    validate_height_spec(fam, h);
    const StarSet& star = fam.star();
    long long e = fam.e();
    auto cn = normalized(star, h.counting);
    auto mi = invariants(star, h.counting);
    ZetaResult res;
    res.a = mi.a;
    res.b = mi.b;
    res.lambda = mi.lambda;
    res.tau_bg = tamagawa_constant(inputs);
    res.truncation = opt.truncation;
    res.quotient = "Gal(Q(zeta_" + std::to_string(e) + ")/Q)";

    for (auto& [p, pts] : conditions.allowed)
        if (h.is_bad(p)) throw capability_error("condition at a bad place without tabulated local data");

    std::set<long long> sigma = h.bad_primes;
    for (auto& [p, pts] : conditions.allowed) sigma.insert(p);

    // Galois orbits of the minimum locus with their stabilizers and the
    // attached nonprincipal Dirichlet characters
    struct OrbitData {
        std::vector<int> points;
        std::vector<DirichletCharacter> dirichlet_set;
    };
    std::vector<OrbitData> orbits;
    long long uexp = fam.gamma().gamma().exponent();
    auto all_psi = characters_mod(e, std::max<long long>(uexp, 1));
    for (const auto& orb : star.orbits()) {
        if (orb[0] == 0 || !(cn.values[orb[0]] == Rational(1))) continue;
        OrbitData od;
        od.points = orb;
        std::vector<long long> stab;
        for (std::size_t i = 0; i < fam.units().size(); ++i)
            if (star.act(static_cast<int>(i), orb[0]) == orb[0]) stab.push_back(fam.units()[i]);
        for (const auto& psi : all_psi) {
            bool trivial_on_stab = true;
            for (long long u : stab)
                if (psi.exponent(u % e == 0 ? 1 : u % e) != 0) trivial_on_stab = false;
            if (trivial_on_stab && psi.order() != 1) od.dirichlet_set.push_back(psi);
        }
        if (od.dirichlet_set.size() + 1 != od.points.size())
            throw group_error("orbit character count mismatch");
        orbits.push_back(std::move(od));
    }
    if (static_cast<long long>(orbits.size()) != res.b)
        throw group_error("minimum locus orbit count mismatch");

    // Leading coefficient of L^Sigma(s, rho^{W1}) at its order-b pole,
    // shared by every contributing character: per orbit one Dedekind zeta
    // of Q (residue 1) with the Sigma factors removed, times the
    // nonprincipal L(1, psi) with the Sigma factors removed.
    double l_leading;
    bool nonprincipal_present = false;
    {
        std::complex<double> acc = 1.0;
        for (const auto& od : orbits) {
            double zeta_part = 1.0;
            for (long long p : sigma) zeta_part *= 1.0 - 1.0 / static_cast<double>(p);
            acc *= zeta_part;
            for (const auto& psi : od.dirichlet_set) {
                nonprincipal_present = true;
                std::complex<double> Lv = dirichlet_l_at_one(psi);
                for (long long p : sigma)
                    if (psi.conductor() % p != 0)
                        Lv *= 1.0 - psi.primitive_value(p) / static_cast<double>(p);
                acc *= Lv;
            }
        }
        if (std::abs(acc.imag()) > 1e-9 * std::abs(acc))
            throw group_error("leading L-coefficient should be real");
        l_leading = acc.real();
    }

    auto primes = primes_up_to(opt.truncation);
    double lambda_eff = std::min(res.lambda.to_double(), 2.0);
    double big_j = 1;
    for (int f : fam.desc().factors) big_j *= f;

    std::complex<double> omega_acc = 0.0;
    double tail_rel = 0.0;
    double r_logderiv_trivial = 0.0;
    int contributing = 0;

    for (const auto& chi : support.characters) {
        CharacterContribution cc;
        cc.name = chi.str();

        int dim = 0;
        bool undecidable = false;
        for (const auto& od : orbits) {
            auto c = detail::orbit_contributes(fam, chi, od.points[0]);
            if (!c.has_value()) { undecidable = true; break; }
            if (*c) ++dim;
        }
        if (undecidable)
            throw capability_error(
                "cannot certify triviality of a Kummer character on an orbit; supply the "
                "answer or drop the character from the support");
        cc.fixed_dim = dim;
        cc.contributes = dim == static_cast<int>(res.b);
        if (!cc.contributes) {
            res.per_character.push_back(cc);
            continue;
        }

        // bad-place factors: with H = 1 there, a locally nontrivial
        // component integrates to zero over the full local group
        std::complex<double> bad_factor = 1.0;
        for (long long p : h.bad_primes) {
            bool locally_trivial;
            if (chi.dirichlet)
                locally_trivial = chi.dir.conductor() % p != 0 &&
                                  std::abs(chi.dir.primitive_value(p) -
                                           std::complex<double>(1.0)) < 1e-9;
            else {
                locally_trivial = true;
                for (const auto& k : chi.kummer)
                    if (!detail::is_mth_power_in_qp(k, p)) locally_trivial = false;
            }
            if (!locally_trivial) { bad_factor = 0.0; break; }
            bad_factor *= local_total_mass(fam, p).to_double();
        }
        bool inf_trivial = true;
        if (chi.dirichlet) inf_trivial = chi.dir.even();
        else
            for (const auto& k : chi.kummer)
                if (k.m % 2 == 0 && k.negative) inf_trivial = false;
        if (!inf_trivial) bad_factor = 0.0;
        else bad_factor *= local_infinite_mass(fam).to_double();

        if (std::abs(bad_factor) == 0.0) {
            cc.value = 0.0;
            res.per_character.push_back(cc);
            continue;
        }

        if (!chi.dirichlet && !chi.trivial())
            throw capability_error(
                "nontrivial contributing Kummer characters are not numerically evaluated");

        // condition-place integrals
        for (auto& [w, allowed] : conditions.allowed) {
            if (chi.dirichlet && chi.dir.conductor() % w == 0)
                throw capability_error("contributing character ramified at a condition place");
            std::complex<double> integral = 0.0;
            int fr = fam.frob_index(w);
            for (int pt : allowed) {
                if (star.act(fr, pt) != pt) continue;
                long long pe = detail::pairing_exponent(fam, chi, w, pt);
                integral += unit_root(-pe, e) *
                            std::pow(static_cast<double>(w), -cn.values[pt].to_double());
            }
            bad_factor *= integral;
        }

        ++contributing;

        // truncated remainder product over p <= truncation outside Sigma
        std::complex<double> log_r = 0.0;
        {
            long long D = 1;
            for (int pt = 1; pt < star.size(); ++pt) D = std::lcm(D, cn.values[pt].den());
            long long M = e;
            if (chi.dirichlet) M = std::lcm(M, chi.dir.modulus());

            // per residue class mod M: the local factor
            // f = H^_p(1, chi) L_p(1)^-1 as an exact exponent polynomial
            std::vector<long long> units_m;
            for (long long u = 1; u < M; ++u)
                if (std::gcd(u, M) == 1) units_m.push_back(u);
            if (M == 1) units_m = {1};
            struct Term { long long x; std::complex<double> c; };  // coeff * p^(-x/D)
            std::vector<std::vector<Term>> factor_terms(units_m.size());
            for (std::size_t ui = 0; ui < units_m.size(); ++ui) {
                long long u = units_m[ui];
                int fr = fam.frob_index(u % e);
                std::map<long long, std::complex<double>> f{{0, 1.0}};
                for (int pt = 1; pt < star.size(); ++pt) {
                    if (star.act(fr, pt) != pt) continue;
                    long long pe;
                    if (chi.dirichlet) {
                        long long m = fam.desc().m();
                        pe = (static_cast<long long>(chi.dir.exponent(u % chi.dir.modulus())) *
                              star.rep(pt)) % m * (e / m);
                    } else {
                        pe = 0;  // trivial character
                    }
                    long long x = cn.values[pt].num() * (D / cn.values[pt].den());
                    f[x] += unit_root(-pe, e);
                }
                for (const auto& od : orbits)
                    for (int len : detail::orbit_cycle_lengths(star, od.points, fr)) {
                        // multiply by (1 - p^-len)
                        std::map<long long, std::complex<double>> g;
                        for (auto& [x, c] : f) {
                            g[x] += c;
                            g[x + len * D] -= c;
                        }
                        f = std::move(g);
                    }
                for (auto& [x, c] : f)
                    if (x != 0 || std::abs(c - std::complex<double>(1.0)) > 1e-14)
                        factor_terms[ui].push_back({x, x == 0 ? c - 1.0 : c});
            }
            auto class_index = [&](long long p) {
                long long r = p % M;
                auto it = std::lower_bound(units_m.begin(), units_m.end(), r);
                return static_cast<std::size_t>(it - units_m.begin());
            };
            for (long long p : primes) {
                if (sigma.count(p)) continue;
                std::complex<double> f = 1.0;
                for (const auto& t : factor_terms[M == 1 ? 0 : class_index(p)])
                    f += t.c * std::pow(static_cast<double>(p),
                                        -static_cast<double>(t.x) / static_cast<double>(D));
                log_r += std::log(f);
            }

            // class-by-class tail: expand log f into a short exponent
            // series and accelerate each exponent with character prime sums
            const long long CUT = 5 * D;
            std::map<long long, std::vector<std::complex<double>>> logf_coeff;
            double coef_bound = 0;
            for (std::size_t ui = 0; ui < units_m.size(); ++ui) {
                std::map<long long, std::complex<double>> g;
                for (const auto& t : factor_terms[ui])
                    if (t.x <= CUT) g[t.x] += t.c;
                std::map<long long, std::complex<double>> gk{{0, 1.0}};
                std::map<long long, std::complex<double>> logf;
                for (int k = 1; k <= 5; ++k) {
                    std::map<long long, std::complex<double>> next;
                    for (auto& [xa, ca] : gk)
                        for (auto& [xb, cb] : g) {
                            if (xa + xb > CUT) continue;
                            next[xa + xb] += ca * cb;
                        }
                    gk = std::move(next);
                    if (gk.empty()) break;
                    double sign = (k % 2 == 1) ? 1.0 : -1.0;
                    for (auto& [x, c] : gk) logf[x] += sign / k * c;
                }
                for (auto& [x, c] : logf) {
                    if (std::abs(c) < 1e-15) continue;
                    auto& v = logf_coeff[x];
                    v.resize(units_m.size(), 0.0);
                    v[ui] = c;
                    coef_bound = std::max(coef_bound, std::abs(c));
                }
            }
            auto psis = characters_mod(M, std::max<long long>(detail::unit_group_exponent(M), 1));
            std::complex<double> tail = 0.0;
            for (auto& [x, coefs] : logf_coeff) {
                double xr = static_cast<double>(x) / static_cast<double>(D);
                if (xr <= 1.0) throw group_error("remainder series has a divergent exponent");
                for (const auto& psi : psis) {
                    std::complex<double> proj = 0.0;
                    for (std::size_t ui = 0; ui < units_m.size(); ++ui)
                        proj += coefs[ui] * std::conj(psi.value(units_m[ui] % M));
                    proj /= static_cast<double>(units_m.size());
                    if (std::abs(proj) < 1e-15) continue;
                    std::complex<double> spsi = prime_l_sum(psi, xr);
                    std::complex<double> partial = 0.0;
                    for (long long p : primes) {
                        if (std::gcd(p, M) != 1) continue;
                        partial += psi.value(p) * std::pow(static_cast<double>(p), -xr);
                    }
                    tail += proj * (spsi - partial);
                }
            }
            log_r += tail;
            tail_rel = std::max(
                tail_rel, 8.0 * coef_bound *
                                  prime_zeta_tail(static_cast<double>(CUT + D) / D,
                                                  opt.truncation, primes) +
                              1e-11);
        }

        std::complex<double> value = bad_factor * l_leading * std::exp(log_r);
        cc.value = value;
        omega_acc += value;
        res.per_character.push_back(cc);

        // log-derivative of the trivial-character remainder for the
        // second-order prediction coefficient
        if (chi.trivial()) {
            double acc = 0.0;
            for (long long p : primes) {
                if (sigma.count(p)) continue;
                int fr = fam.frob_index(p);
                double lp = std::log(static_cast<double>(p));
                double hp = 1.0, dhp = 0.0;
                for (int pt = 1; pt < star.size(); ++pt) {
                    if (star.act(fr, pt) != pt) continue;
                    double cx = cn.values[pt].to_double();
                    double t = std::pow(static_cast<double>(p), -cx);
                    hp += t;
                    dhp += -cx * lp * t;
                }
                double linv = 1.0, dlinv = 0.0;
                for (const auto& od : orbits)
                    for (int len : detail::orbit_cycle_lengths(star, od.points, fr)) {
                        double t = std::pow(static_cast<double>(p), -double(len));
                        double term = 1.0 - t;
                        dlinv = dlinv * term + linv * (double(len) * lp * t);
                        linv *= term;
                    }
                acc += (dhp * linv + hp * dlinv) / (hp * linv);
            }
            r_logderiv_trivial = acc;
        }
    }

    if (std::abs(omega_acc.imag()) > 1e-8 * std::max(1.0, std::abs(omega_acc.real())))
        throw group_error("omega came out non-real");
    res.omega = omega_acc.real();
    res.tail_bound =
        tail_rel + 2.0 * (big_j + 1) * prime_zeta_tail(lambda_eff, opt.truncation, primes);
    if (opt.signal_tail && res.tail_bound > opt.tolerance)
        throw resource_error("truncation too small: tail bound above tolerance");

    res.count_constant = static_cast<double>(inputs.gF) * static_cast<double>(inputs.sha2) *
                         res.omega / static_cast<double>(inputs.gStarF);
    for (long long j = 2; j <= res.b - 1; ++j) res.count_constant /= static_cast<double>(j);

    if (res.b == 2) {
        double glog = r_logderiv_trivial;
        for (long long p : sigma)
            glog += 2.0 * std::log(static_cast<double>(p)) / (static_cast<double>(p) - 1.0);
        res.kappa = 2.0 * kEulerGamma - 1.0 + glog;
        res.kappa_exact = !nonprincipal_present && conditions.allowed.empty() && contributing == 1;
    }
    return res;
}

inline ZetaResult zeta_leading_constant(const QFamily& fam, const HeightSpec& h,
                                        const ArithmeticInputs& inputs,
                                        const CharacterSupport& support,
                                        const ZetaOptions& opt = {}) {
    return zeta_measure(fam, h, inputs, support, LocalConditions{}, opt);
}

// omega_H of the elementary open set cut out by residue conditions at
// finitely many tame places; additive over disjoint condition sets and
// equal to tau_H on the full space.
inline double measure_of_elementary_open(const QFamily& fam, const HeightSpec& h,
                                         const ArithmeticInputs& inputs,
                                         const LocalConditions& conditions,
                                         const ZetaOptions& opt = {}) {
    std::set<std::string> free;
    std::set<long long> extra;
    for (auto& [p, pts] : conditions.allowed) {
        free.insert(std::to_string(p));
        extra.insert(p);
    }
    auto support = character_support(fam, h, free, extra);
    return zeta_measure(fam, h, inputs, support, conditions, opt).omega;
}

} // namespace torsorcount
