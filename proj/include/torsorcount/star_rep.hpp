#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include "local.hpp"
#include "star.hpp"

namespace torsorcount {

// The Cartier dual Hom(J, mu_e) as a Gamma-group: elements are the value
// vectors of homs J -> Z/e in lexicographic order (zero map first), the
// group law is pointwise addition, and gamma acts by
// (gamma . f)(j) = chi(gamma) * f(gamma^-1 j).
struct DualGroup {
    std::vector<std::vector<int>> homs;
    GammaGroup group;
    long long e = 1;

    int index_of(const std::vector<int>& h) const {
        auto it = std::lower_bound(homs.begin(), homs.end(), h);
        if (it == homs.end() || *it != h) throw group_error("value vector is not a homomorphism");
        return static_cast<int>(it - homs.begin());
    }
};

inline DualGroup build_dual(const GammaGroup& gg) {
    const FiniteGroup& J = gg.base();
    long long e = J.exponent();
    auto homs = homs_to_cyclic(J, e);
    int n = static_cast<int>(homs.size());
    std::map<std::vector<int>, int> index;
    for (int i = 0; i < n; ++i) index[homs[i]] = i;
    std::vector<int> table(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            std::vector<int> sum(J.order());
            for (int j = 0; j < J.order(); ++j)
                sum[j] = static_cast<int>((homs[a][j] + homs[b][j]) % e);
            table[static_cast<std::size_t>(a) * n + b] = index.at(sum);
        }
    FiniteGroup D("dual(" + J.name() + ")", std::move(table));
    std::vector<std::vector<int>> action(gg.gamma().order(), std::vector<int>(n));
    for (int g = 0; g < gg.gamma().order(); ++g) {
        int ginv = gg.gamma().inv(g);
        long long chi = gg.quotient().cyclotomic_mod(g, e);
        for (int a = 0; a < n; ++a) {
            std::vector<int> img(J.order());
            for (int j = 0; j < J.order(); ++j)
                img[j] = static_cast<int>((chi * homs[a][gg.act(ginv, j)]) % e);
            action[g][a] = index.at(img);
        }
    }
    GammaGroup dual_gamma(std::move(D), gg.quotient(), std::move(action));
    return DualGroup{std::move(homs), std::move(dual_gamma), e};
}

// A generalized permutation matrix with exact e-th-root-of-unity entries:
// column c carries its single nonzero entry in row row_of_col[c] with phase
// exp(2 pi i phase_of_col[c] / e).
struct GenPermMatrix {
    long long e = 1;
    std::vector<int> row_of_col;
    std::vector<int> phase_of_col;

    friend bool operator==(const GenPermMatrix& a, const GenPermMatrix& b) {
        return a.e == b.e && a.row_of_col == b.row_of_col && a.phase_of_col == b.phase_of_col;
    }

    GenPermMatrix operator*(const GenPermMatrix& rhs) const {
        GenPermMatrix out;
        out.e = e;
        int n = static_cast<int>(row_of_col.size());
        out.row_of_col.resize(n);
        out.phase_of_col.resize(n);
        for (int c = 0; c < n; ++c) {
            int m = rhs.row_of_col[c];
            out.row_of_col[c] = row_of_col[m];
            out.phase_of_col[c] = static_cast<int>((rhs.phase_of_col[c] + phase_of_col[m]) % e);
        }
        return out;
    }

    std::vector<std::vector<std::complex<double>>> dense() const {
        int n = static_cast<int>(row_of_col.size());
        std::vector<std::vector<std::complex<double>>> M(n,
            std::vector<std::complex<double>>(n, 0.0));
        for (int c = 0; c < n; ++c)
            M[row_of_col[c]][c] = unit_root(phase_of_col[c], e);
        return M;
    }

    std::complex<double> trace() const {
        std::complex<double> t = 0.0;
        for (int c = 0; c < static_cast<int>(row_of_col.size()); ++c)
            if (row_of_col[c] == c) t += unit_root(phase_of_col[c], e);
        return t;
    }
};

// The representation rho^W_chi attached to a Galois-invariant set W of star
// points and a cocycle chi valued in the dual group:
// rho(gamma)_{phi,phi'} = chi~(gamma)(phi) when phi = gamma * phi'.
class StarRepresentation {
public:
    StarRepresentation(const StarSet& star, const DualGroup& dual, std::vector<int> w,
                       Cocycle chi)
        : star_(&star), dual_(&dual), w_(std::move(w)), chi_(std::move(chi)) {
        std::sort(w_.begin(), w_.end());
        pos_in_w_.assign(star.size(), -1);
        for (std::size_t i = 0; i < w_.size(); ++i) pos_in_w_[w_[i]] = static_cast<int>(i);
        const GammaGroup& gg = star.owner();
        if (!chi_.valid_on(dual.group)) throw group_error("chi is not a cocycle in the dual group");
        for (int g = 0; g < gg.gamma().order(); ++g)
            for (int p : w_)
                if (pos_in_w_[star.act(g, p)] < 0)
                    throw group_error("W is not Galois invariant");
        // homomorphism property on a generating set
        for (int a : detail::generating_set(gg.gamma()))
            for (int b : detail::generating_set(gg.gamma()))
                if (!(matrix(gg.gamma().mul(a, b)) == matrix(a) * matrix(b)))
                    throw group_error("rho is not a homomorphism");
    }

    const StarSet& star() const { return *star_; }
    const std::vector<int>& w() const { return w_; }
    int dim() const { return static_cast<int>(w_.size()); }
    long long e() const { return dual_->e; }
    const Cocycle& chi() const { return chi_; }

    // chi~(gamma)(phi), an exponent mod e
    int phase(int gamma, int point) const {
        return dual_->homs[chi_(gamma)][star_->rep(point)];
    }

    GenPermMatrix matrix(int gamma) const {
        GenPermMatrix M;
        M.e = dual_->e;
        M.row_of_col.resize(dim());
        M.phase_of_col.resize(dim());
        for (int c = 0; c < dim(); ++c) {
            int target = star_->act(gamma, w_[c]);
            M.row_of_col[c] = pos_in_w_[target];
            M.phase_of_col[c] = phase(gamma, target);
        }
        return M;
    }

    // Dimension of the simultaneous fixed subspace of all rho(gamma); by
    // character orthogonality it is the average of the traces, which must
    // come out an integer.
    int fixed_subspace_dim() const {
        const FiniteGroup& M = star_->owner().gamma();
        long double acc = 0.0L;
        for (int g = 0; g < M.order(); ++g) {
            for (int c = 0; c < dim(); ++c)
                if (star_->act(g, w_[c]) == w_[c])
                    acc += cosl(2.0L * 3.14159265358979323846264338327950288L *
                                phase(g, w_[c]) / dual_->e);
        }
        long double avg = acc / M.order();
        long long rounded = llroundl(avg);
        if (fabsl(avg - rounded) > 1e-6L)
            throw group_error("fixed subspace dimension did not come out integral");
        return static_cast<int>(rounded);
    }

private:
    const StarSet* star_;
    const DualGroup* dual_;
    std::vector<int> w_;
    std::vector<int> pos_in_w_;
    Cocycle chi_;
};

inline GenPermMatrix rho_matrix(const StarRepresentation& rep, int gamma) {
    return rep.matrix(gamma);
}

// Local Artin L-factor at a tame unramified place, computed by Frobenius
// orbit factorization: each cycle O of Frobenius on W contributes
// (1 - zeta_O q^(-|O| s))^-1 with zeta_O the product of the phases around
// the cycle.
inline std::complex<double> l_factor(const StarRepresentation& rep, const LocalPlace& v,
                                     std::complex<double> s) {
    validate_place(rep.star().owner(), v);
    const auto& w = rep.w();
    std::vector<int> pos(rep.star().size(), -1);
    for (std::size_t i = 0; i < w.size(); ++i) pos[w[i]] = static_cast<int>(i);
    std::vector<char> seen(w.size(), 0);
    std::complex<double> L = 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (seen[i]) continue;
        long long zeta = 0;
        int len = 0;
        int p = w[i];
        do {
            seen[pos[p]] = 1;
            zeta += rep.phase(v.frob, p);
            ++len;
            p = rep.star().act(v.frob, p);
        } while (p != w[i]);
        std::complex<double> factor =
            1.0 - unit_root(zeta, rep.e()) * std::exp(-s * (double(len) * std::log(double(v.q))));
        L /= factor;
    }
    return L;
}

// Trace identity (two independent code paths): tr rho(Frob_v) computed from
// the matrix must equal the measure-weighted character sum over the residue
// fibers above the Frobenius-fixed part of W.
inline bool trace_identity_check(const StarRepresentation& rep, const LocalCohomology& lc,
                                 const std::vector<int>& chi_frob, double tol = 1e-12) {
    std::complex<double> lhs = rep.matrix(lc.place().frob).trace();
    std::complex<double> rhs = 0.0;
    auto fibers = residue_fibers(lc);
    for (int p : rep.w()) {
        auto it = fibers.find(p);
        if (it == fibers.end()) continue;
        // each fiber holds #G(F_v) classes of weight 1/#G(F_v), all with the
        // same character value
        rhs += it->second.to_double() * tate_pairing_value(lc, chi_frob, p).value();
    }
    return std::abs(lhs - rhs) <= tol;
}

} // namespace torsorcount
