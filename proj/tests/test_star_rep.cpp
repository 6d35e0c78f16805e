#include <doctest.h>

#include <torsorcount/star_rep.hpp>

#include <optional>

#include "oracles.hpp"
#include "test_support.hpp"

using namespace torsorcount;

namespace {

std::vector<int> full_w(const StarSet& s) {
    std::vector<int> w(s.size());
    std::iota(w.begin(), w.end(), 0);
    return w;
}

} // namespace

TEST_CASE("rho matrices") {
    auto gg = tsup::q_constant_gamma(FiniteGroup::cyclic(4));
    auto s = build_star(gg);
    auto dual = build_dual(gg);

    SUBCASE("trivial character at the identity gives the identity matrix") {
        StarRepresentation rep(s, dual, full_w(s), Cocycle::trivial(dual.group));
        auto M = rep.matrix(0);
        for (int c = 0; c < rep.dim(); ++c) {
            CHECK(M.row_of_col[c] == c);
            CHECK(M.phase_of_col[c] == 0);
        }
    }
    SUBCASE("a 1x1 representation is the character value") {
        // W = {order-2 point} is Galois stable
        std::vector<int> w{s.point_of(2)};
        for (const auto& chi : cocycle_set(dual.group)) {
            StarRepresentation rep(s, dual, w, chi);
            for (int g = 0; g < gg.gamma().order(); ++g) {
                auto M = rep.matrix(g);
                CHECK(M.row_of_col[0] == 0);
                CHECK(M.phase_of_col[0] == dual.homs[chi(g)][2]);
            }
        }
    }
}

TEST_CASE("rho is a homomorphism on all pairs for |W| <= 12") {
    for (const auto& gg : tsup::property_matrix(8, 6)) {
        auto s = build_star(gg);
        if (s.size() > 12) continue;
        auto dual = build_dual(gg);
        for (const auto& chi : h1_classes(dual.group)) {
            StarRepresentation rep(s, dual, full_w(s), chi);
            for (int a = 0; a < gg.gamma().order(); ++a)
                for (int b = 0; b < gg.gamma().order(); ++b)
                    CHECK(rep.matrix(gg.gamma().mul(a, b)) == rep.matrix(a) * rep.matrix(b));
        }
    }
}

TEST_CASE("cohomologous characters give matrices conjugate by the theta diagonal") {
    for (const auto& gg : tsup::property_matrix(6, 4)) {
        auto s = build_star(gg);
        auto dual = build_dual(gg);
        long long e = dual.e;
        auto w = full_w(s);
        for (const auto& chi : h1_classes(dual.group)) {
            for (int theta = 0; theta < dual.group.base().order(); ++theta) {
                // chi'(g) = chi(g) + (g . theta) - theta in the dual module
                std::vector<int> shifted(gg.gamma().order());
                for (int g = 0; g < gg.gamma().order(); ++g) {
                    int gt = dual.group.act(g, theta);
                    int v = dual.group.base().mul(chi(g), gt);
                    shifted[g] = dual.group.base().mul(v, dual.group.base().inv(theta));
                }
                Cocycle chi2{shifted};
                REQUIRE(chi2.valid_on(dual.group));
                StarRepresentation r1(s, dual, w, chi);
                StarRepresentation r2(s, dual, w, chi2);
                for (int g = 0; g < gg.gamma().order(); ++g) {
                    // rho'(g) = D^-1 rho(g) D with D = diag(theta(phi))
                    auto M1 = r1.matrix(g);
                    auto M2 = r2.matrix(g);
                    for (int c = 0; c < static_cast<int>(w.size()); ++c) {
                        CHECK(M1.row_of_col[c] == M2.row_of_col[c]);
                        int row_pt = w[M1.row_of_col[c]];
                        int col_pt = w[c];
                        long long expect =
                            M1.phase_of_col[c] + dual.homs[theta][s.rep(col_pt)] -
                            dual.homs[theta][s.rep(row_pt)];
                        CHECK(((expect - M2.phase_of_col[c]) % e + e) % e == 0);
                    }
                }
            }
        }
    }
}

TEST_CASE("fixed subspace dimension") {
    SUBCASE("trivial character counts Galois orbits") {
        for (const auto& gg : tsup::property_matrix(8, 6)) {
            auto s = build_star(gg);
            auto dual = build_dual(gg);
            StarRepresentation rep(s, dual, full_w(s), Cocycle::trivial(dual.group));
            CHECK(rep.fixed_subspace_dim() == static_cast<int>(s.orbits().size()));
        }
    }
    SUBCASE("mu_4 model: character of order 2 fixes only the even points") {
        auto gg = tsup::mu_model_gamma(4);
        auto s = build_star(gg);
        auto dual = build_dual(gg);
        // Gamma = (Z/4)^x = {1,3}; dual homs Z/4 -> Z/4.  With the trivial
        // star action a constant cocycle chi must be Galois-stable; the
        // order-2 hom j -> 2j is.
        std::vector<int> hom2{0, 2, 0, 2};
        int idx = dual.index_of(hom2);
        // constant cocycle gamma -> hom2 is valid iff hom2 is fixed and of
        // order dividing the relations; verify through the cocycle filter
        bool found = false;
        for (const auto& chi : cocycle_set(dual.group)) {
            bool constant = true;
            for (int g = 0; g < gg.gamma().order(); ++g)
                if (chi(g) != (g == 0 ? 0 : idx)) constant = false;
            if (!constant) continue;
            found = true;
            StarRepresentation rep(s, dual, full_w(s), chi);
            // phases: phi -> 2*phi mod 4: fixed vectors need phase 0:
            // points 0 and 2 qualify
            CHECK(rep.fixed_subspace_dim() == 2);
        }
        CHECK(found);
    }
}

TEST_CASE("orbit-factorized L-factor equals the dense determinant") {
    for (const auto& gg : tsup::property_matrix(6, 4)) {
        auto s = build_star(gg);
        auto dual = build_dual(gg);
        for (const auto& chi : h1_classes(dual.group)) {
            StarRepresentation rep(s, dual, full_w(s), chi);
            for (long long q : {5LL, 7LL, 11LL, 13LL, 23LL, 31LL, 41LL, 43LL, 47LL}) {
                auto v = oracle::place_for(gg, q);
                if (!v) continue;
                for (double sig : {0.9, 1.0, 1.5, 2.0}) {
                    std::complex<double> sc(sig, 0.7);
                    auto fast = l_factor(rep, *v, sc);
                    auto t = std::exp(-sc * std::log(double(q)));
                    auto slow = 1.0 / oracle::det_one_minus(rep.matrix(v->frob), t);
                    CHECK(std::abs(fast - slow) <= 1e-12 * std::abs(slow));
                }
            }
        }
    }
}

TEST_CASE("L-factor shapes on small cases") {
    auto gg = tsup::q_constant_gamma(FiniteGroup::cyclic(3));
    auto s = build_star(gg);
    auto dual = build_dual(gg);
    std::complex<double> sc(1.2, 0.0);

    SUBCASE("single fixed point, trivial character: (1 - q^-s)^-1") {
        StarRepresentation rep(s, dual, {0}, Cocycle::trivial(dual.group));
        auto v = *oracle::place_for(gg, 7);
        auto want = 1.0 / (1.0 - std::exp(-sc * std::log(7.0)));
        CHECK(std::abs(l_factor(rep, v, sc) - want) < 1e-14);
    }
    SUBCASE("2-cycle orbit, trivial character: (1 - q^-2s)^-1") {
        // q = 5 acts on (Z/3)_* by multiplication by 5^-1 = 2: swaps 1, 2
        StarRepresentation rep(s, dual, {1, 2}, Cocycle::trivial(dual.group));
        auto v = *oracle::place_for(gg, 5);
        auto want = 1.0 / (1.0 - std::exp(-2.0 * sc * std::log(5.0)));
        CHECK(std::abs(l_factor(rep, v, sc) - want) < 1e-14);
    }
    SUBCASE("1-point orbit with entry -1: (1 + q^-s)^-1") {
        // need a quotient with room for a nontrivial dual cocycle
        auto g2 = tsup::trivial_gamma(FiniteGroup::cyclic(2), 2);
        auto s2 = build_star(g2);
        auto d2 = build_dual(g2);
        Cocycle chi{std::vector<int>{0, 1}};
        REQUIRE(chi.valid_on(d2.group));
        StarRepresentation rep(s2, d2, {1}, chi);
        LocalPlace v{7, 1, true};  // frobenius is the generator
        auto want = 1.0 / (1.0 + std::exp(-sc * std::log(7.0)));
        CHECK(std::abs(l_factor(rep, v, sc) - want) < 1e-14);
    }
}

TEST_CASE("trace identity against the residue-fiber route") {
    for (const auto& gg : tsup::property_matrix(6, 4)) {
        if (!gg.base().is_abelian()) continue;
        auto s = build_star(gg);
        auto dual = build_dual(gg);
        for (const auto& chi : h1_classes(dual.group)) {
            StarRepresentation rep(s, dual, full_w(s), chi);
            for (long long q : {5LL, 7LL, 11LL, 13LL, 17LL, 19LL, 23LL, 29LL, 31LL, 37LL, 41LL, 43LL, 47LL}) {
                auto v = oracle::place_for(gg, q);
                if (!v) continue;
                LocalCohomology lc(gg, s, *v);
                CHECK(trace_identity_check(rep, lc, dual.homs[chi(v->frob)]));
            }
        }
    }
}

TEST_CASE("Fourier transform tracks the L-factor with the ftlfun tail bound") {
    // |H^_v(s, chi^-1) L_v(s, rho)^-1 - 1| <= 2 |J| q^(-lambda Re s) for the
    // normalized counting function, W_1 its minimum locus.
    for (const auto& gg : tsup::property_matrix(6, 4)) {
        if (!gg.base().is_abelian()) continue;
        auto s = build_star(gg);
        auto dual = build_dual(gg);
        long long e = dual.e;
        // With c == 1 and n = |J|-1 fixed minimum points, the second-order
        // coefficient of H^ L^-1 - 1 is n(n+1)/2, which exceeds 2|J| once
        // |J| >= 6; the constant-function case is therefore only covered
        // where the stated constant is actually valid.
        std::vector<CountingFunction> cs{c_discriminant(s)};
        if (gg.base().order() <= 5) cs.push_back(constant_counting(s));
        for (const auto& c : cs) {
            auto cn = normalized(s, c);
            auto mi = invariants(s, cn);
            std::vector<int> w1;
            for (int p = 1; p < s.size(); ++p)
                if (cn(p) == Rational(1)) w1.push_back(p);
            LocalHeight h{cn, {}};
            for (const auto& chi : h1_classes(dual.group)) {
                StarRepresentation rep(s, dual, w1, chi);
                for (long long q : {7LL, 11LL, 13LL, 29LL, 31LL, 37LL, 41LL, 61LL, 71LL, 97LL}) {
                    auto v = oracle::place_for(gg, q);
                    if (!v) continue;
                    LocalCohomology lc(gg, s, *v);
                    // inverse character so the conjugation in H^ matches rho
                    std::vector<int> inv_chi(gg.base().order());
                    const auto& hom = dual.homs[chi(v->frob)];
                    for (int j = 0; j < gg.base().order(); ++j)
                        inv_chi[j] = static_cast<int>((e - hom[j]) % e);
                    for (double sig : {0.8, 1.0, 1.4, 2.0}) {
                        std::complex<double> sc(sig, 0.0);
                        auto HF = local_fourier(lc, h, inv_chi, sc);
                        auto L = l_factor(rep, *v, sc);
                        double bound = 2.0 * gg.base().order() *
                                       std::pow(double(q), -mi.lambda.to_double() * sig);
                        CHECK(std::abs(HF / L - 1.0) <= bound);
                    }
                }
            }
        }
    }
}
