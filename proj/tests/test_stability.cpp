// Stability engine: the root-adjunction ladder, theorem-driven shortcuts,
// the generic fallback, and the compose-then-factor oracle. The recurring
// shape is a three-way agreement check: theorem verdicts == generic verdicts
// == direct factorization of the iterated composition.

#include "polystab/stability.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace polystab;

static Poly P(const TowerPtr& tw, u32 lvl, std::vector<u64> cs) {
    return Poly::from_ints(tw, lvl, cs);
}

TEST_CASE("flagship stable cubic x^3 + x^2 + 1 over F_2", "[stability]") {
    auto tw = make_tower(2);
    Poly f = P(tw, 0, {1, 0, 1, 1});

    auto rep = certify_stability(f, 3, 5, CertifyMethod::TheoremDriven);
    CHECK(rep.stable_to_depth);
    CHECK(rep.certificate.find("cubic-family") != std::string::npos);
    CHECK(!rep.first_reducible);

    auto repg = certify_stability(f, 3, 4, CertifyMethod::Generic);
    CHECK(repg.stable_to_depth);
    for (u32 n = 0; n <= 4; ++n) CHECK(repg.steps[n].verdict == StepVerdict::Irreducible);
    // each adjoined root generates a degree-3 extension of the previous field
    REQUIRE(repg.step_degrees.size() == 4);
    for (u32 deg : repg.step_degrees) CHECK(deg == 3);

    // the expensive road: iterate and factor, up to degree 3^5 = 243
    for (u32 n = 1; n <= 5; ++n) CHECK(direct_iterate_oracle(f, n));
}

TEST_CASE("x^3 + x + 1 over F_2 is irreducible but not stable", "[stability]") {
    // the second iterate factors as (x^3+x^2+1)(x^6+x^5+1); the failure is at
    // level 1, so level 0 alone says nothing about stability
    auto tw = make_tower(2);
    Poly f = P(tw, 0, {1, 1, 0, 1});

    auto rep = certify_stability(f, 3, 4, CertifyMethod::TheoremDriven);
    CHECK(!rep.stable_to_depth);
    REQUIRE(rep.first_reducible);
    CHECK(*rep.first_reducible == 1);
    CHECK(rep.steps[0].verdict == StepVerdict::Irreducible);
    CHECK(rep.steps[1].verdict == StepVerdict::Reducible);
    CHECK(rep.steps[2].verdict == StepVerdict::Untested);
    CHECK(rep.certificate.empty());
    CHECK(rep.steps[0].rule == "cubic-trinomial");
    CHECK(rep.steps[1].rule == "cubic-trinomial");

    auto repg = certify_stability(f, 3, 4, CertifyMethod::Generic);
    CHECK(repg.first_reducible == rep.first_reducible);
    CHECK(direct_iterate_oracle(f, 1));
    CHECK(!direct_iterate_oracle(f, 2));

    // over F_8 its roots are rational, so it dies at level 0
    auto t8 = extend(tw, find_irreducible(tw, 0, 3));
    Poly f8 = poly_embed(f, t8, 1);
    auto rep8 = certify_stability(f8, 3, 2, CertifyMethod::TheoremDriven);
    CHECK(!rep8.stable_to_depth);
    REQUIRE(rep8.first_reducible);
    CHECK(*rep8.first_reducible == 0);
    CHECK(rep8.steps[1].verdict == StepVerdict::Untested);
}

TEST_CASE("level-0 irreducibility promotes to a certificate for family cubics",
          "[stability]") {
    // (x+1)^3 + x = x^3 + x^2 + 1 read over F_4 and F_16
    auto t2 = make_tower(2);
    for (u32 m : {2u, 4u}) {
        auto tm = extend(t2, find_irreducible(t2, 0, m));
        Poly f = poly_embed(P(t2, 0, {1, 0, 1, 1}), tm, 1);
        auto rep = certify_stability(f, 3, 3, CertifyMethod::TheoremDriven);
        CHECK(rep.stable_to_depth);
        CHECK(rep.certificate.find("cubic-family") != std::string::npos);
        CHECK(certify_stability(f, 3, 2, CertifyMethod::Generic).stable_to_depth);
    }
}

TEST_CASE("quadratic family member over F_13", "[stability]") {
    auto tw = make_tower(13);
    // b = 1, delta = 2 (non-square mod 13): f = x^2 + x + 3
    Poly f = P(tw, 0, {3, 1, 1});
    REQUIRE(discriminant(f).index() == 2);

    auto rep = certify_stability(f, 2, 8, CertifyMethod::TheoremDriven);
    CHECK(rep.stable_to_depth);
    CHECK(rep.certificate.find("quadratic-family") != std::string::npos);
    CHECK(certify_stability(f, 2, 6, CertifyMethod::Generic).stable_to_depth);
    for (u32 n = 1; n <= 3; ++n) CHECK(direct_iterate_oracle(f, n));
}

TEST_CASE("q = 3 mod 4 kills the quadratic family at level 1", "[stability]") {
    auto tw = make_tower(7);
    // b = 1, delta = 3 non-square: c1 = delta/2 = 5, c0 = (delta^2-4delta)/16 = 2
    Poly f = P(tw, 0, {2, 5, 1});
    FieldElement delta = discriminant(f);
    REQUIRE(delta.index() == 3);
    REQUIRE(!is_square(delta));

    auto rep = certify_stability(f, 2, 4, CertifyMethod::TheoremDriven);
    CHECK(!rep.stable_to_depth);
    REQUIRE(rep.first_reducible);
    CHECK(*rep.first_reducible == 1);
    CHECK(rep.certificate.empty());

    auto repg = certify_stability(f, 2, 4, CertifyMethod::Generic);
    CHECK(*repg.first_reducible == 1);
    CHECK(direct_iterate_oracle(f, 1));
    CHECK(!direct_iterate_oracle(f, 2));
}

TEST_CASE("three-way agreement on every quadratic over F_5", "[stability][oracle]") {
    auto tw = make_tower(5);
    for (u64 c2 = 1; c2 < 5; ++c2)
        for (u64 c1 = 0; c1 < 5; ++c1)
            for (u64 c0 = 0; c0 < 5; ++c0) {
                Poly f = P(tw, 0, {c0, c1, c2});
                auto a = certify_stability(f, 2, 3, CertifyMethod::TheoremDriven);
                auto b = certify_stability(f, 2, 3, CertifyMethod::Generic);
                CHECK(a.first_reducible == b.first_reducible);
                for (u32 n = 1; n <= 4; ++n) {
                    bool want = !a.first_reducible || *a.first_reducible >= n;
                    CHECK(direct_iterate_oracle(f, n) == want);
                }
            }
}

TEST_CASE("three-way agreement on every quadratic over F_4", "[stability][oracle]") {
    auto t2 = make_tower(2);
    auto tw = extend(t2, find_irreducible(t2, 0, 2));
    const BigInt q = tw->cardinality(1);
    for (BigInt i2 = 1; i2 < q; ++i2)
        for (BigInt i1 = 0; i1 < q; ++i1)
            for (BigInt i0 = 0; i0 < q; ++i0) {
                Poly f(tw, 1,
                       {FieldElement::from_index(tw, 1, i0), FieldElement::from_index(tw, 1, i1),
                        FieldElement::from_index(tw, 1, i2)});
                auto a = certify_stability(f, 2, 3, CertifyMethod::TheoremDriven);
                auto b = certify_stability(f, 2, 3, CertifyMethod::Generic);
                CHECK(a.first_reducible == b.first_reducible);
                for (u32 n = 1; n <= 3; ++n) {
                    bool want = !a.first_reducible || *a.first_reducible >= n;
                    CHECK(direct_iterate_oracle(f, n) == want);
                }
            }
}

TEST_CASE("quartic binomials and the power-shift family over F_5", "[stability]") {
    auto tw = make_tower(5);
    for (u64 av = 1; av < 5; ++av) {
        Poly f = P(tw, 0, {5 - av, 0, 0, 0, 1});  // x^4 - a
        auto rep = certify_stability(f, 4, 2, CertifyMethod::TheoremDriven);
        bool ns = !is_square(FieldElement::from_prime(tw, 0, av));
        // the square test governs level 0; deeper levels are not promised
        CHECK((rep.steps[0].verdict == StepVerdict::Irreducible) == ns);
        if (!ns) CHECK(*rep.first_reducible == 0);
        auto repg = certify_stability(f, 4, 2, CertifyMethod::Generic);
        CHECK(repg.first_reducible == rep.first_reducible);
        for (u32 n = 1; n <= 2; ++n) {
            bool want = !rep.first_reducible || *rep.first_reducible >= n;
            CHECK(direct_iterate_oracle(f, n) == want);
        }
    }

    SECTION("shifted member (x+2)^4 - 2 with ab non-square is certified") {
        Poly fam = P(tw, 0, {(16 - 2) % 5, 32 % 5, 24 % 5, 8 % 5, 1});
        auto repf = certify_stability(fam, 4, 4, CertifyMethod::TheoremDriven);
        CHECK(repf.stable_to_depth);
        CHECK(repf.certificate.find("quartic-power-family") != std::string::npos);
        CHECK(certify_stability(fam, 4, 2, CertifyMethod::Generic).stable_to_depth);
    }
    SECTION("ab square fails at level 0") {
        Poly bad = P(tw, 0, {0, 4, 6 % 5, 4, 1});  // (x+1)^4 - 1
        auto repb = certify_stability(bad, 4, 2, CertifyMethod::TheoremDriven);
        CHECK(!repb.stable_to_depth);
        CHECK(*repb.first_reducible == 0);
    }
}

TEST_CASE("char-3 quartic trinomials ride the resolvent rule", "[stability]") {
    auto tw = make_tower(3);
    for (u64 c1 = 1; c1 < 3; ++c1)
        for (u64 c0 = 0; c0 < 3; ++c0) {
            Poly f = P(tw, 0, {c0, c1, 0, 0, 1});
            auto a = certify_stability(f, 4, 3, CertifyMethod::TheoremDriven);
            auto b = certify_stability(f, 4, 3, CertifyMethod::Generic);
            CHECK(a.first_reducible == b.first_reducible);
            for (const auto& s : a.steps)
                if (s.verdict != StepVerdict::Untested) CHECK(s.rule == "quartic-resolvent");
        }
}

TEST_CASE("chain mechanics on a reducible base", "[stability]") {
    auto tw = make_tower(5);
    Poly f = P(tw, 0, {1, 0, 1});  // x^2 + 1 = (x+2)(x+3)
    ChainTrace low(f, ChainTrace::RootPolicy::LowestDegree);
    low.extend();
    CHECK(low.step_degree(0) == 1);
    CHECK(low.alpha(1).level() == 0);  // a rational root keeps the level down
    CHECK(!low.step_frontier_irreducible(0));
    CHECK(eval(f, low.alpha(1)).is_zero());
    CHECK(!capelli_step(low, 0));
    CHECK_THROWS_AS(capelli_step(low, 5), ChainTooShortError);
}

TEST_CASE("verdicts are independent of which chain root is adjoined",
          "[stability][property]") {
    // when f - alpha_n is reducible the chain must pick a root of some proper
    // factor; either extreme choice yields the same level verdicts
    auto tw = make_tower(5);
    for (u64 c1 = 0; c1 < 5; ++c1)
        for (u64 c0 = 0; c0 < 5; ++c0) {
            Poly f = P(tw, 0, {c0, c1, 1});
            ChainTrace lo(f, ChainTrace::RootPolicy::LowestDegree);
            ChainTrace hi(f, ChainTrace::RootPolicy::HighestDegree);
            for (u32 n = 0; n < 3; ++n) {
                lo.extend();
                hi.extend();
                CHECK(capelli_step(lo, n) == capelli_step(hi, n));
            }
        }
}

TEST_CASE("depth budgets", "[stability]") {
    auto t5 = make_tower(5);
    // a square discriminant dies at level 0, well before any budget applies
    Poly f = P(t5, 0, {3, 1, 1});
    auto rep0 = certify_stability(f, 2, 12, CertifyMethod::Generic, 4);
    CHECK(!rep0.stable_to_depth);
    CHECK(*rep0.first_reducible == 0);

    // a certified family member marks the levels past the budget as covered
    auto t13 = make_tower(13);
    Poly g = P(t13, 0, {3, 1, 1});
    auto rep = certify_stability(g, 2, 12, CertifyMethod::TheoremDriven, 4);
    CHECK(rep.stable_to_depth);
    for (u32 n = 0; n <= 4; ++n) CHECK(rep.steps[n].verdict == StepVerdict::Irreducible);
    for (u32 n = 5; n <= 12; ++n)
        CHECK(rep.steps[n].verdict == StepVerdict::CoveredByCertificate);

    // the generic path has no certificate to lean on: same poly, same budget
    CHECK_THROWS_AS(certify_stability(g, 2, 12, CertifyMethod::Generic, 4),
                    DepthBudgetExceededError);

    // degree gate
    Poly quint = P(t5, 0, {1, 1, 0, 0, 0, 1});
    CHECK_THROWS_AS(certify_stability(quint, 5, 2, CertifyMethod::Generic),
                    DegreeUnsupportedError);
    CHECK_THROWS_AS(certify_stability(f, 3, 2, CertifyMethod::Generic),
                    DegreeUnsupportedError);  // declared degree must match
}

TEST_CASE("report rendering", "[stability][io]") {
    auto tw = make_tower(2);
    auto rep = certify_stability(P(tw, 0, {1, 0, 1, 1}), 3, 3, CertifyMethod::TheoremDriven);
    CHECK(rep.verdict_string() == "IIII");
    std::string line = rep.to_line();
    CHECK(line.find("verdicts=IIII") != std::string::npos);
    CHECK(line.find("certificate=cubic-family") != std::string::npos);
    CHECK(line.find("first_reducible=-") != std::string::npos);

    auto bad = certify_stability(P(tw, 0, {1, 1, 0, 1}), 3, 3, CertifyMethod::TheoremDriven);
    CHECK(bad.verdict_string() == "IRUU");
    CHECK(bad.to_line().find("first_reducible=1") != std::string::npos);
    CHECK(bad.to_line().find("certificate=-") != std::string::npos);
}

TEST_CASE("root-reachability sweep", "[stability]") {
    auto t2 = make_tower(2);
    auto t3 = make_tower(3);
    CHECK(sr_check(P(t2, 0, {1, 1, 1}), 2, 3).holds);
    CHECK(sr_check(P(t2, 0, {1, 1, 0, 1}), 3, 3).holds);
    CHECK(sr_check(P(t3, 0, {2, 1, 1}), 2, 2).holds);
    CHECK(sr_check(P(t3, 0, {0, 0, 0, 0, 1}), 4, 2).holds);

    // degree 5 is where it first breaks: (x^2+x+1)(x^3+x+1) over F_2, with
    // the violation already at r = 1, a = 0
    Poly f5 = P(t2, 0, {1, 1, 1}) * P(t2, 0, {1, 1, 0, 1});
    auto res = sr_check(f5, 5, 1);
    CHECK(!res.holds);
    REQUIRE(res.witness);
    CHECK(res.witness->r == 1);
    CHECK(res.witness->a.is_zero());

    // the cap triggers once the shift field outgrows it (r = 2 needs 4 > 3)
    CHECK_THROWS_AS(sr_check(P(t2, 0, {1, 1, 1}), 2, 2, BigInt(3)), SizeCapExceededError);
    CHECK_THROWS_AS(sr_check(f5, 0, 1), ZeroParameterError);
}
