#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "galois.hpp"
#include "local.hpp"

namespace torsorcount {

inline constexpr long double kPi = 3.14159265358979323846264338327950288L;
inline constexpr long double kEulerGamma = 0.57721566490153286060651209008240243L;

inline std::vector<long long> primes_up_to(long long n) {
    std::vector<long long> out;
    if (n < 2) return out;
    std::vector<char> comp(static_cast<std::size_t>(n) + 1, 0);
    for (long long i = 2; i <= n; ++i) {
        if (comp[i]) continue;
        out.push_back(i);
        for (long long j = i * i; j <= n; j += i) comp[j] = 1;
    }
    return out;
}

inline bool is_prime(long long n) {
    if (n < 2) return false;
    for (long long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Gauss's digamma theorem at rational arguments a/q, 0 < a < q.
inline long double digamma_rational(long long a, long long q) {
    if (a <= 0 || a >= q) throw std::domain_error("digamma_rational needs 0 < a < q");
    long double x = static_cast<long double>(a) / q;
    long double r = -kEulerGamma - logl(2.0L * q) - (kPi / 2.0L) / tanl(kPi * x);
    for (long long n = 1; 2 * n <= q - 1; ++n)
        r += 2.0L * cosl(2.0L * kPi * n * a / q) * logl(sinl(kPi * n / q));
    return r;
}

// Smallest primitive root modulo an odd prime p.
inline long long smallest_primitive_root(long long p) {
    if (p == 2) return 1;
    long long phi = p - 1;
    std::vector<long long> prime_factors;
    long long t = phi;
    for (long long d = 2; d * d <= t; ++d)
        if (t % d == 0) {
            prime_factors.push_back(d);
            while (t % d == 0) t /= d;
        }
    if (t > 1) prime_factors.push_back(t);
    for (long long g = 2; g < p; ++g) {
        bool ok = true;
        for (long long f : prime_factors)
            if (mod_pow(g, phi / f, p) == 1) { ok = false; break; }
        if (ok) return g;
    }
    throw std::logic_error("no primitive root found");
}

// A Dirichlet character of modulus N with values in (1/m)Z/Z, stored as
// additive exponents: chi(a) = exp(2 pi i * exponent(a) / m).
class DirichletCharacter {
public:
    DirichletCharacter() = default;
    DirichletCharacter(long long modulus, long long m, std::vector<int> exps)
        : modulus_(modulus), m_(m), exps_(std::move(exps)) {
        if (static_cast<long long>(exps_.size()) != modulus_)
            throw std::invalid_argument("value table has wrong length");
        compute_conductor();
    }

    long long modulus() const { return modulus_; }
    long long order_modulus() const { return m_; }
    long long conductor() const { return conductor_; }
    bool is_principal() const { return conductor_ == 1; }

    bool is_unit(long long a) const { return std::gcd(((a % modulus_) + modulus_) % modulus_, modulus_) == 1; }

    // additive exponent in Z/m; caller must ensure gcd(a, N) = 1
    int exponent(long long a) const {
        long long r = ((a % modulus_) + modulus_) % modulus_;
        if (!is_unit(r)) throw std::domain_error("character evaluated off the unit group");
        return exps_[r];
    }

    std::complex<double> value(long long a) const {
        long long r = ((a % modulus_) + modulus_) % modulus_;
        if (!is_unit(r)) return 0.0;
        return unit_root(exps_[r], m_);
    }

    // value of the primitive character inducing chi (nonzero whenever
    // gcd(a, conductor) = 1): evaluate at a unit lift mod N congruent to a
    // mod the conductor.
    std::complex<double> primitive_value(long long a) const {
        long long r = ((a % conductor_) + conductor_) % conductor_;
        if (std::gcd(r == 0 ? conductor_ : r, conductor_) != 1) return 0.0;
        return unit_root(primitive_exponent(a), m_);
    }

    // additive exponent of the inducing primitive character; requires
    // gcd(a, conductor) = 1
    int primitive_exponent(long long a) const {
        long long r = ((a % conductor_) + conductor_) % conductor_;
        if (std::gcd(r == 0 ? conductor_ : r, conductor_) != 1)
            throw std::domain_error("character ramified at the argument");
        for (long long lift = r; lift <= r + 2 * modulus_ + conductor_; lift += conductor_)
            if (lift > 0 && is_unit(lift)) return exps_[lift % modulus_];
        throw std::logic_error("no unit lift found");
    }

    bool even() const { return modulus_ == 1 || exps_[modulus_ - 1] == 0; }

    // multiplicative order in the character group
    int order() const {
        int d = 1;
        for (long long a = 0; a < modulus_; ++a)
            if (is_unit(a) && exps_[a] != 0)
                d = static_cast<int>(std::lcm<long long>(d, m_ / std::gcd<long long>(m_, exps_[a])));
        return d;
    }

    friend bool operator==(const DirichletCharacter& x, const DirichletCharacter& y) {
        return x.modulus_ == y.modulus_ && x.m_ == y.m_ && x.exps_ == y.exps_;
    }

private:
    void compute_conductor() {
        conductor_ = modulus_;
        for (long long f = 1; f <= modulus_; ++f) {
            if (modulus_ % f != 0) continue;
            bool factors = true;
            for (long long a = 0; a < modulus_ && factors; ++a) {
                if (!is_unit(a)) continue;
                if (a % f == 1 % f && exps_[a] != 0) factors = false;
            }
            if (factors) { conductor_ = f; break; }
        }
    }

    long long modulus_ = 1;
    long long m_ = 1;
    std::vector<int> exps_{0};
    long long conductor_ = 1;
};

// All characters (Z/N)^x -> Z/m (additive exponents mod m), enumerated and
// returned with the principal character first.
inline std::vector<DirichletCharacter> characters_mod(long long N, long long m) {
    if (N == 1) return {DirichletCharacter(1, m, std::vector<int>{0})};
    // the unit group ordered with 1 first, as an abstract FiniteGroup, so
    // the generic hom enumerator applies
    std::vector<long long> units;
    for (long long a = 1; a < N; ++a)
        if (std::gcd(a, N) == 1) units.push_back(a);
    int n = static_cast<int>(units.size());
    std::map<long long, int> idx;
    for (int i = 0; i < n; ++i) idx[units[i]] = i;
    std::vector<int> table(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            table[static_cast<std::size_t>(a) * n + b] = idx.at(units[a] * units[b] % N);
    FiniteGroup U("units", std::move(table));
    std::vector<DirichletCharacter> out;
    for (const auto& hom : homs_to_cyclic(U, m)) {
        std::vector<int> exps(static_cast<std::size_t>(N), 0);
        for (int i = 0; i < n; ++i) exps[units[i]] = hom[i];
        out.emplace_back(N, m, std::move(exps));
    }
    return out;
}

// L(1, chi) for a non-principal character, via the digamma expansion of the
// Hurwitz zeta function:  L(1, chi) = -(1/q) sum_a chi(a) psi(a/q).
inline std::complex<double> dirichlet_l_at_one(const DirichletCharacter& chi) {
    if (chi.is_principal()) throw std::domain_error("L(1, chi) diverges for the principal character");
    long long q = chi.modulus();
    std::complex<long double> acc = 0.0L;
    for (long long a = 1; a < q; ++a) {
        if (!chi.is_unit(a)) continue;
        auto v = chi.value(a);
        acc += std::complex<long double>(v.real(), v.imag()) * digamma_rational(a, q);
    }
    acc *= -1.0L / q;
    return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

inline double riemann_zeta_real(double x) { return std::riemann_zeta(x); }

// Prime zeta P(x) = sum_p p^-x for x > 1, via Moebius inversion of log zeta.
inline double prime_zeta(double x) {
    if (x <= 1.0) throw std::domain_error("prime zeta needs x > 1");
    static const int mu[] = {0,  1, -1, -1, 0, -1, 1,  -1, 0, 0,  1, -1, 0,  -1, 1,
                             1,  0, -1, 0,  -1, 0, 1,  1,  -1, 0, 0,  1, 0,  0,  -1,
                             -1, -1, 0, 1,  1,  1, 0,  -1, 1, 1,  0, -1, -1};
    long double acc = 0.0L;
    for (int k = 1; k <= 42; ++k) {
        if (mu[k] == 0) continue;
        long double kx = static_cast<long double>(k) * x;
        long double term;
        if (kx > 50.0L) {
            // zeta(y) - 1 ~ 2^-y + 3^-y for large y
            term = log1pl(powl(2.0L, -kx) + powl(3.0L, -kx));
        } else {
            term = logl(static_cast<long double>(std::riemann_zeta(static_cast<double>(kx))));
        }
        acc += static_cast<long double>(mu[k]) / k * term;
        if (fabsl(term) < 1e-20L) break;
    }
    return static_cast<double>(acc);
}

// Tail sum_{p > P} p^-x computed against a sieve partial sum.
inline double prime_zeta_tail(double x, long long P, const std::vector<long long>& primes) {
    long double partial = 0.0L;
    for (long long p : primes) {
        if (p > P) break;
        partial += powl(static_cast<long double>(p), -static_cast<long double>(x));
    }
    return static_cast<double>(prime_zeta(x) - static_cast<double>(partial));
}

// Hurwitz zeta via Euler-Maclaurin, for real s > 1 and 0 < x <= 1.
inline long double hurwitz_zeta(long double s, long double x) {
    if (s <= 1.0L) throw std::domain_error("hurwitz_zeta needs s > 1");
    const int N = 24;
    static const long double B[] = {1.0L / 6, -1.0L / 30, 1.0L / 42, -1.0L / 30,
                                    5.0L / 66, -691.0L / 2730, 7.0L / 6};
    long double acc = 0.0L;
    for (int n = 0; n < N; ++n) acc += powl(n + x, -s);
    long double Nx = N + x;
    acc += powl(Nx, 1.0L - s) / (s - 1.0L);
    acc += 0.5L * powl(Nx, -s);
    long double poch = s;        // s (s+1) ... rising
    long double npow = powl(Nx, -s - 1.0L);
    long double fact = 1.0L;
    for (int j = 1; j <= 7; ++j) {
        fact *= (2 * j - 1) * (2 * j);
        acc += B[j - 1] * poch / fact * npow;
        poch *= (s + 2 * j - 1) * (s + 2 * j);
        npow /= Nx * Nx;
    }
    return acc;
}

// L(s, chi) for real s > 1 through Hurwitz zeta; valid for any character,
// principal included (giving zeta(s) times the missing Euler factors).
inline std::complex<double> dirichlet_l_real(const DirichletCharacter& chi, double s) {
    long long q = chi.modulus();
    std::complex<long double> acc = 0.0L;
    for (long long a = 1; a <= q; ++a) {
        if (!chi.is_unit(a % q == 0 ? q : a)) continue;
        auto v = chi.value(a);
        acc += std::complex<long double>(v.real(), v.imag()) *
               hurwitz_zeta(s, static_cast<long double>(a) / q);
    }
    acc *= powl(static_cast<long double>(q), -static_cast<long double>(s));
    return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

// sum_p chi(p) p^-x for real x > 1, by Moebius inversion of log L.  The
// derived quantity sum_{p = r mod M} p^-x follows by character averaging.
inline std::complex<double> prime_l_sum(const DirichletCharacter& chi, double x) {
    if (x <= 1.0) throw std::domain_error("prime_l_sum needs x > 1");
    std::complex<long double> acc = 0.0L;
    for (int k = 1; k <= 42; ++k) {
        // chi^k
        std::vector<int> exps(static_cast<std::size_t>(chi.modulus()), 0);
        bool any = false;
        for (long long a = 1; a < std::max<long long>(chi.modulus(), 2); ++a)
            if (chi.is_unit(a)) {
                exps[a] = static_cast<int>((static_cast<long long>(chi.exponent(a)) * k) %
                                           chi.order_modulus());
                if (exps[a]) any = true;
            }
        (void)any;
        DirichletCharacter chik(chi.modulus(), chi.order_modulus(), std::move(exps));
        auto L = dirichlet_l_real(chik, k * x);
        std::complex<long double> logL = std::log(std::complex<long double>(L.real(), L.imag()));
        static const int mu[] = {0,  1, -1, -1, 0, -1, 1,  -1, 0, 0,  1, -1, 0,  -1, 1,
                                 1,  0, -1, 0,  -1, 0, 1,  1,  -1, 0, 0,  1, 0,  0,  -1,
                                 -1, -1, 0, 1,  1,  1, 0,  -1, 1, 1,  0, -1, -1};
        if (mu[k] != 0) acc += static_cast<long double>(mu[k]) / k * logL;
        if (std::abs(L - std::complex<double>(1.0)) < 1e-20 && k > 4) break;
    }
    return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

} // namespace torsorcount
