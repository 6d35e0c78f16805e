#include <doctest.h>

#include <torsorcount/local.hpp>

#include <optional>

#include "test_support.hpp"

using namespace torsorcount;

namespace {

std::optional<LocalPlace> place_for(const GammaGroup& gg, long long q) {
    if (std::gcd(q, static_cast<long long>(gg.base().order())) != 1) return std::nullopt;
    long long e = gg.base().exponent();
    for (int g = 0; g < gg.gamma().order(); ++g)
        if (gg.quotient().cyclotomic_mod(g, e) == q % e) return LocalPlace{q, g, true};
    return std::nullopt;
}

const std::vector<long long> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                        43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

} // namespace

TEST_CASE("residue fibers at tame places") {
    SUBCASE("Z/2 at q = 5") {
        auto gg = tsup::q_constant_gamma(FiniteGroup::cyclic(2));
        auto s = build_star(gg);
        LocalCohomology lc(gg, s, *place_for(gg, 5));
        auto fibers = residue_fibers(lc);
        CHECK(fibers.size() == 2);
        CHECK(fibers.at(0) == Rational(1));
        CHECK(fibers.at(1) == Rational(1));
        CHECK(lc.total_classes() == 4);
    }
    SUBCASE("Z/3 at q = 5: only the unramified fiber") {
        auto gg = tsup::q_constant_gamma(FiniteGroup::cyclic(3));
        auto s = build_star(gg);
        LocalCohomology lc(gg, s, *place_for(gg, 5));
        auto fibers = residue_fibers(lc);
        CHECK(fibers.size() == 1);
        CHECK(fibers.count(0) == 1);
    }
    SUBCASE("Z/3 at q = 7: three fibers of mass one") {
        auto gg = tsup::q_constant_gamma(FiniteGroup::cyclic(3));
        auto s = build_star(gg);
        LocalCohomology lc(gg, s, *place_for(gg, 7));
        auto fibers = residue_fibers(lc);
        CHECK(fibers.size() == 3);
        for (auto& [p, mass] : fibers) CHECK(mass == Rational(1));
    }
    SUBCASE("nonabelian owners are rejected") {
        auto gg = tsup::q_constant_gamma(FiniteGroup::symmetric(3));
        auto s = build_star(gg);
        CHECK_THROWS_AS(LocalCohomology(gg, s, *place_for(gg, 7)), capability_error);
    }
    SUBCASE("wild places are rejected") {
        auto gg = tsup::q_constant_gamma(FiniteGroup::cyclic(3));
        auto s = build_star(gg);
        CHECK_THROWS_AS(LocalCohomology(gg, s, LocalPlace{3, 0, true}), group_error);
    }
}

TEST_CASE("unramified mass is exactly one at every tame place") {
    for (const auto& gg : tsup::property_matrix(6, 4)) {
        if (!gg.base().is_abelian()) continue;
        auto s = build_star(gg);
        for (long long q : kPrimes) {
            auto v = place_for(gg, q);
            if (!v) continue;
            LocalCohomology lc(gg, s, *v);
            CHECK(lc.unramified_mass() == Rational(1));
            CHECK(lc.total_mass() == Rational(static_cast<std::int64_t>(lc.residue_points().size())));
        }
    }
}

TEST_CASE("Tate pairing values") {
    auto g2 = tsup::q_constant_gamma(FiniteGroup::cyclic(2));
    auto s2 = build_star(g2);
    LocalCohomology lc2(g2, s2, *place_for(g2, 5));

    SUBCASE("distinguished point pairs to 1") {
        for (const auto& chi : homs_to_cyclic(g2.base(), 2))
            CHECK(tate_pairing_value(lc2, chi, 0).value() == std::complex<double>(1.0, 0.0));
    }
    SUBCASE("e = 2, nontrivial character and point give -1") {
        std::vector<int> chi{0, 1};
        auto w = tate_pairing_value(lc2, chi, 1);
        CHECK(w.value().real() == doctest::Approx(-1.0));
    }
    SUBCASE("e = 3 third root of unity") {
        auto g3 = tsup::q_constant_gamma(FiniteGroup::cyclic(3));
        auto s3 = build_star(g3);
        LocalCohomology lc3(g3, s3, *place_for(g3, 7));
        std::vector<int> chi{0, 1, 2};  // identity hom
        auto w = tate_pairing_value(lc3, chi, s3.point_of(1));
        CHECK(w.value().real() == doctest::Approx(std::cos(2 * 3.14159265358979323846 / 3)));
        CHECK(w.value().imag() == doctest::Approx(std::sin(2 * 3.14159265358979323846 / 3)));
    }
    SUBCASE("non-fixed residue points are rejected") {
        auto g3 = tsup::q_constant_gamma(FiniteGroup::cyclic(3));
        auto s3 = build_star(g3);
        LocalCohomology lc3(g3, s3, *place_for(g3, 5));
        std::vector<int> chi{0, 1, 2};
        CHECK_THROWS_AS(tate_pairing_value(lc3, chi, 1), group_error);
    }
}

TEST_CASE("pairing is multiplicative in the character and in the point") {
    for (const auto& gg : tsup::property_matrix(6, 4)) {
        if (!gg.base().is_abelian()) continue;
        auto s = build_star(gg);
        long long e = gg.base().exponent();
        auto homs = homs_to_cyclic(gg.base(), e);
        for (long long q : {7LL, 11LL, 13LL, 29LL, 31LL, 37LL, 41LL, 43LL, 61LL}) {
            auto v = place_for(gg, q);
            if (!v) continue;
            LocalCohomology lc(gg, s, *v);
            for (const auto& c1 : homs)
                for (const auto& c2 : homs) {
                    std::vector<int> c12(c1.size());
                    for (std::size_t j = 0; j < c1.size(); ++j)
                        c12[j] = static_cast<int>((c1[j] + c2[j]) % e);
                    for (int p : lc.residue_points()) {
                        auto lhs = tate_pairing_value(lc, c12, p);
                        auto r1 = tate_pairing_value(lc, c1, p);
                        auto r2 = tate_pairing_value(lc, c2, p);
                        CHECK((lhs.num - r1.num - r2.num) % e == 0);
                    }
                    for (int p1 : lc.residue_points())
                        for (int p2 : lc.residue_points()) {
                            int prod = s.point_of(gg.base().mul(s.rep(p1), s.rep(p2)));
                            auto lhs = tate_pairing_value(lc, c1, prod);
                            auto r1 = tate_pairing_value(lc, c1, p1);
                            auto r2 = tate_pairing_value(lc, c1, p2);
                            CHECK((lhs.num - r1.num - r2.num) % e == 0);
                        }
                }
        }
    }
}

TEST_CASE("local Fourier transforms") {
    auto g2 = tsup::q_constant_gamma(FiniteGroup::cyclic(2));
    auto s2 = build_star(g2);
    LocalCohomology lc2(g2, s2, *place_for(g2, 5));
    LocalHeight h{constant_counting(s2), {}};

    std::complex<double> s(1.3, 0.4);
    SUBCASE("Z/2, q=5, trivial character: 1 + 5^-s") {
        auto got = local_fourier(lc2, h, {0, 0}, s);
        auto want = 1.0 + std::exp(-s * std::log(5.0));
        CHECK(std::abs(got - want) < 1e-14);
    }
    SUBCASE("Z/2, q=5, nontrivial character: 1 - 5^-s") {
        auto got = local_fourier(lc2, h, {0, 1}, s);
        auto want = 1.0 - std::exp(-s * std::log(5.0));
        CHECK(std::abs(got - want) < 1e-14);
    }
    SUBCASE("Z/3 at q=5 has empty ramified residue set") {
        auto g3 = tsup::q_constant_gamma(FiniteGroup::cyclic(3));
        auto s3 = build_star(g3);
        LocalCohomology lc3(g3, s3, *place_for(g3, 5));
        LocalHeight h3{constant_counting(s3), {}};
        for (const auto& chi : homs_to_cyclic(g3.base(), 3))
            CHECK(std::abs(local_fourier(lc3, h3, chi, s) - std::complex<double>(1.0)) < 1e-14);
    }
    SUBCASE("value at s = 0 with the trivial character counts residue points") {
        for (const auto& gg : tsup::property_matrix(6, 4)) {
            if (!gg.base().is_abelian()) continue;
            auto st = build_star(gg);
            LocalHeight hh{c_discriminant(st), {}};
            std::vector<int> triv(gg.base().order(), 0);
            for (long long q : {7LL, 11LL, 13LL, 61LL}) {
                auto v = place_for(gg, q);
                if (!v) continue;
                LocalCohomology lc(gg, st, *v);
                auto got = local_fourier(lc, hh, triv, 0.0);
                CHECK(got.real() == doctest::Approx(double(lc.residue_points().size())));
                CHECK(got.imag() == doctest::Approx(0.0));
            }
        }
    }
    SUBCASE("override tables replace the tame formula") {
        LocalHeight hov{constant_counting(s2), {}};
        hov.overrides[5] = LocalOverride::constant_one(Rational(4));
        auto got = local_fourier(lc2, hov, {0, 1}, s);
        CHECK(std::abs(got - std::complex<double>(4.0)) < 1e-14);
        LocalOverride table;
        table.entries.push_back({Rational(1), Rational(1), UnitRoot{0, 2}});
        table.entries.push_back({Rational(1), Rational(5), UnitRoot{1, 2}});
        hov.overrides[5] = table;
        got = local_fourier(lc2, hov, {0, 0}, s);
        auto want = 1.0 - std::exp(-s * std::log(5.0));
        CHECK(std::abs(got - want) < 1e-14);
    }
}

TEST_CASE("residue map commutes with twists and subgroup pushforward") {
    for (const auto& gg : tsup::property_matrix(6, 4)) {
        auto s = build_star(gg);
        for (long long q : {5LL, 7LL, 11LL, 13LL}) {
            auto v = place_for(gg, q);
            if (!v) continue;
            for (const auto& sigma : h1_classes(gg))
                CHECK(residue_twist_check(gg, s, sigma, *v));
            for (const auto& elems : gg.invariant_subgroups())
                CHECK(residue_subgroup_check(gg, s, elems, *v));
        }
    }
}

TEST_CASE("local residues land in the Frobenius-fixed part") {
    for (const auto& gg : tsup::property_matrix(6, 4)) {
        auto s = build_star(gg);
        for (long long q : {5LL, 7LL, 11LL}) {
            auto v = place_for(gg, q);
            if (!v) continue;
            auto m = tame_local_model(gg, *v);
            for (const auto& beta : cocycle_set(m.group)) {
                int p = local_residue(m, s, beta);
                CHECK(s.act(v->frob, p) == p);
            }
        }
    }
}
