#pragma once

// Test-only independent oracles: brute-force enumerators written against
// the public residue/height operations, a dense determinant for L-factors,
// and a helper to realize tame places on abstract Gamma-groups.  These stay
// independent of the optimized library paths they are used to check.

#include <torsorcount/enumerate.hpp>
#include <torsorcount/star_rep.hpp>

#include <complex>
#include <optional>
#include <vector>

namespace oracle {

using namespace torsorcount;

inline std::optional<LocalPlace> place_for(const GammaGroup& gg, long long q) {
    if (std::gcd(q, static_cast<long long>(gg.base().order())) != 1) return std::nullopt;
    long long e = gg.base().exponent();
    for (int g = 0; g < gg.gamma().order(); ++g)
        if (gg.quotient().cyclotomic_mod(g, e) == q % e) return LocalPlace{q, g, true};
    return std::nullopt;
}

// dense determinant of I - t M by Gaussian elimination
inline std::complex<double> det_one_minus(const GenPermMatrix& M, std::complex<double> t) {
    auto D = M.dense();
    int n = static_cast<int>(D.size());
    std::vector<std::vector<std::complex<double>>> A(n, std::vector<std::complex<double>>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A[i][j] = (i == j ? 1.0 : 0.0) - t * D[i][j];
    std::complex<double> det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        double best = 0;
        for (int r = c; r < n; ++r)
            if (std::abs(A[r][c]) > best) { best = std::abs(A[r][c]); piv = r; }
        if (piv < 0 || best == 0.0) return 0.0;
        if (piv != c) { std::swap(A[piv], A[c]); det = -det; }
        det *= A[c][c];
        for (int r = c + 1; r < n; ++r) {
            auto f = A[r][c] / A[c][c];
            for (int j = c; j < n; ++j) A[r][j] -= f * A[c][j];
        }
    }
    return det;
}

inline void mu_oracle_rec(const QFamily& fam, const HeightSpec& h, long long bound,
                          const std::vector<long long>& ps, std::size_t i, KummerClass cur,
                          std::vector<KummerClass>& out) {
    Rational hgt = height_of_kummer(fam, h, cur);
    if (Rational(bound) < hgt) return;
    out.push_back(cur);
    for (std::size_t j = i; j < ps.size(); ++j) {
        if (h.is_bad(ps[j])) continue;
        for (int e = 1; e < fam.desc().m(); ++e) {
            KummerClass k = cur;
            k.exponents[ps[j]] = e;
            if (height_of_kummer(fam, h, k) <= Rational(bound))
                mu_oracle_rec(fam, h, bound, ps, j + 1, k, out);
        }
    }
}

// plain recursion over the prime list, recomputing each height through the
// residue map
inline std::vector<KummerClass> mu_oracle(const QFamily& fam, const HeightSpec& h,
                                          long long bound) {
    std::vector<KummerClass> tame;
    mu_oracle_rec(fam, h, bound, primes_up_to(bound + 1), 0,
                  KummerClass{fam.desc().m(), false, {}}, tame);
    std::vector<KummerClass> out;
    for (const auto& base : tame) {
        std::vector<KummerClass> block{base};
        for (long long p : h.bad_primes) {
            std::vector<KummerClass> next;
            for (const auto& k : block)
                for (int e = 0; e < fam.desc().m(); ++e) {
                    KummerClass k2 = k;
                    if (e) k2.exponents[p] = e;
                    next.push_back(k2);
                }
            block = next;
        }
        for (auto& k : block) {
            if (fam.desc().m() % 2 == 0) {
                KummerClass neg = k;
                neg.negative = true;
                out.push_back(neg);
            }
            out.push_back(k);
        }
    }
    return out;
}

// loop over tame conductors and assign component values by odometer
inline std::vector<CyclicTorsor> cyclic_oracle(const QFamily& fam, const HeightSpec& h,
                                               long long bound) {
    int m = fam.desc().m();
    std::vector<CyclicTorsor> tame_list;
    for (long long N = 2; N <= bound + 1; ++N) {
        long long t = N;
        std::vector<long long> ps;
        bool ok = true;
        for (long long d = 2; d * d <= t && ok; ++d)
            if (t % d == 0) {
                t /= d;
                if (t % d == 0) ok = false;
                ps.push_back(d);
            }
        if (t > 1) ps.push_back(t);
        if (!ok) continue;
        bool bad = false;
        for (long long p : ps)
            if (h.is_bad(p)) bad = true;
        if (bad) continue;
        std::vector<std::vector<int>> choices;
        for (long long p : ps) {
            std::vector<int> vals;
            for (int a = 1; a < m; ++a)
                if ((p - 1) % additive_order(a, m) == 0) vals.push_back(a);
            if (vals.empty()) { bad = true; break; }
            choices.push_back(vals);
        }
        if (bad) continue;
        std::vector<std::size_t> odo(ps.size(), 0);
        while (true) {
            CyclicTorsor ct;
            ct.m = m;
            for (std::size_t i = 0; i < ps.size(); ++i) ct.tame[ps[i]] = choices[i][odo[i]];
            if (height_of_cyclic(fam, h, ct) <= Rational(bound)) tame_list.push_back(ct);
            std::size_t pos = 0;
            while (pos < odo.size() && odo[pos] + 1 == choices[pos].size()) odo[pos++] = 0;
            if (pos == odo.size()) break;
            ++odo[pos];
        }
    }
    CyclicTorsor triv;
    triv.m = m;
    tame_list.push_back(triv);
    std::vector<CyclicTorsor> out;
    for (const auto& base : tame_list) {
        std::vector<CyclicTorsor> block{base};
        for (long long p : h.bad_primes) {
            auto table = local_characters(p, m);
            std::vector<CyclicTorsor> next;
            for (const auto& t2 : block)
                for (std::size_t j = 0; j < table.size(); ++j) {
                    CyclicTorsor t3 = t2;
                    if (j) t3.bad[p] = static_cast<int>(j);
                    next.push_back(t3);
                }
            block = next;
        }
        for (auto& t2 : block) out.push_back(t2);
    }
    return out;
}

template <typename T>
inline std::multiset<std::string> descriptor_set(const std::vector<T>& v) {
    std::multiset<std::string> out;
    for (const auto& x : v) out.insert(x.str());
    return out;
}

} // namespace oracle
