// Field-tower layer: construction, arithmetic, Frobenius machinery, residue
// tests, and the text codecs. Reference values here were either computed by
// hand or frozen from an independent sweep (see tests/support/oracles.hpp).

#include "polystab/poly.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

using namespace polystab;

TEST_CASE("prime field arithmetic and residues", "[tower]") {
    auto f5 = Tower::prime_field(5);
    auto a = FieldElement::from_prime(f5, 0, 2);
    auto b = FieldElement::from_prime(f5, 0, 3);

    CHECK((a * b).is_one());
    CHECK((a + b).is_zero());
    CHECK(inv(a) == b);
    CHECK((a - b) == FieldElement::from_prime(f5, 0, 4));
    CHECK((-a) == b);
    CHECK(pow(a, 4).is_one());

    // squares mod 5 are exactly {0, 1, 4}
    std::set<u64> squares;
    for (u64 v = 0; v < 5; ++v)
        if (is_square(FieldElement::from_prime(f5, 0, v))) squares.insert(v);
    CHECK(squares == std::set<u64>{0, 1, 4});

    // from_prime reduces large inputs mod p
    CHECK(FieldElement::from_prime(f5, 0, 12) == a);

    CHECK_THROWS_AS(inv(FieldElement::zero(f5, 0)), DivisionByZeroError);
    CHECK_THROWS_AS(Tower::prime_field(4), NotPrimeError);
    CHECK_THROWS_AS(Tower::prime_field(1), NotPrimeError);
}

TEST_CASE("F_4 generator relations and Frobenius", "[tower]") {
    auto f2 = Tower::prime_field(2);
    auto f4 = Tower::extend_unchecked(f2, {1, 1, 1});  // x^2 + x + 1
    auto w = FieldElement::generator(f4, 1);
    auto one = FieldElement::one(f4, 1);

    CHECK((w * w * w).is_one());         // multiplicative order 3
    CHECK(w * w == w + one);             // minimal polynomial relation
    CHECK(frobenius(w, 0) == w * w);     // x -> x^2 fixes F_2, swaps w and w^2
    CHECK(trace(w, 0) == FieldElement::one(f4, 0));
    CHECK(norm(w, 0) == FieldElement::one(f4, 0));
    CHECK(!is_cube(w));
    CHECK(is_cube(one));

    CHECK(element_to_text(w) == "[0,1]");
    CHECK(parse_element(f4, 1, "[0,1]") == w);
    CHECK(parse_element(f4, 1, "2") == w);  // compact form = canonical index
}

TEST_CASE("F_9 arithmetic: i^2 = -1 and residue agreement", "[tower]") {
    auto f3 = Tower::prime_field(3);
    auto f9 = Tower::extend_unchecked(f3, {1, 0, 1});  // x^2 + 1
    auto i = FieldElement::generator(f9, 1);

    CHECK((i * i) == -FieldElement::one(f9, 1));
    CHECK(inv(i) == -i);
    CHECK(norm(i, 0) == FieldElement::one(f9, 0));

    // both square tests agree on every element
    for (u64 k = 0; k < 9; ++k) {
        auto e = FieldElement::from_index(f9, 1, k);
        CHECK(is_square(e) == is_square_euler(e));
    }

    // index codec round trips and is a bijection
    std::set<std::string> seen;
    for (u64 k = 0; k < 9; ++k) {
        auto e = FieldElement::from_index(f9, 1, k);
        CHECK(e.index() == k);
        seen.insert(element_to_text(e));
    }
    CHECK(seen.size() == 9);

    CHECK(descriptor_text(*f9) == "3; 1,0,1");
}

TEST_CASE("level mismatch is rejected", "[tower]") {
    auto f2 = Tower::prime_field(2);
    auto f4 = Tower::extend_unchecked(f2, {1, 1, 1});
    auto ground = FieldElement::one(f4, 0);
    auto top = FieldElement::generator(f4, 1);
    CHECK_THROWS_AS(ground + top, LevelMismatchError);
    CHECK_THROWS_AS(ground * top, LevelMismatchError);
}

TEST_CASE("field axioms hold on random triples in a height-2 tower", "[tower][property]") {
    // F_2 -> F_4 -> F_16; a deterministic LCG picks the triples
    auto f2 = Tower::prime_field(2);
    auto f4 = Tower::extend_unchecked(f2, {1, 1, 1});
    auto f16 = extend(f4, find_irreducible(f4, 1, 2));
    REQUIRE(f16->cardinality(2) == 16);

    u64 state = 42;
    auto next = [&]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return (state >> 33) % 16;
    };
    for (int t = 0; t < 64; ++t) {
        auto x = FieldElement::from_index(f16, 2, next());
        auto y = FieldElement::from_index(f16, 2, next());
        auto z = FieldElement::from_index(f16, 2, next());
        CHECK((x + y) + z == x + (y + z));
        CHECK((x * y) * z == x * (y * z));
        CHECK(x * (y + z) == x * y + x * z);
        CHECK(x + y == y + x);
        CHECK(x * y == y * x);
        if (!x.is_zero()) CHECK((x * inv(x)).is_one());
    }
    // Frobenius is additive and multiplicative down to the ground field
    for (int t = 0; t < 16; ++t) {
        auto x = FieldElement::from_index(f16, 2, u64(t));
        auto y = FieldElement::from_index(f16, 2, next());
        CHECK(frobenius(x + y, 0) == frobenius(x, 0) + frobenius(y, 0));
        CHECK(frobenius(x * y, 0) == frobenius(x, 0) * frobenius(y, 0));
        // absolute trace and norm land in the ground field
        CHECK(trace(x, 0).level() == 0);
        CHECK(norm(x, 0).level() == 0);
    }
}

TEST_CASE("trace and norm transitivity through a middle level", "[tower][property]") {
    auto f3 = Tower::prime_field(3);
    auto f9 = Tower::extend_unchecked(f3, {1, 0, 1});
    auto f81 = extend(f9, find_irreducible(f9, 1, 2));
    REQUIRE(f81->cardinality(2) == 81);
    for (u64 k = 0; k < 81; ++k) {
        auto e = FieldElement::from_index(f81, 2, k);
        CHECK(trace(trace(e, 1), 0) == trace(e, 0));
        CHECK(norm(norm(e, 1), 0) == norm(e, 0));
    }
}

TEST_CASE("norm-descent square test matches Euler in a deep odd tower", "[tower][property]") {
    // F_5 -> F_25 -> F_625: the two routes must agree everywhere we sample
    auto f5 = Tower::prime_field(5);
    auto f25 = Tower::extend_unchecked(f5, {2, 0, 1});  // x^2 + 2 (-2 is a non-square mod 5)
    auto top = extend(f25, find_irreducible(f25, 1, 2));
    REQUIRE(top->cardinality(2) == 625);

    u64 state = 7;
    for (int t = 0; t < 200; ++t) {
        state = state * 2862933555777941757ULL + 3037000493ULL;
        auto e = FieldElement::from_index(top, 2, (state >> 20) % 625);
        CHECK(is_square(e) == is_square_euler(e));
    }
    // exactly (q-1)/2 + 1 squares in the middle field
    u64 count = 0;
    for (u64 k = 0; k < 25; ++k)
        if (is_square(FieldElement::from_index(f25, 1, k))) ++count;
    CHECK(count == 13);
}

TEST_CASE("char-2 towers: squaring is a bijection and every element is a square", "[tower]") {
    auto f2 = Tower::prime_field(2);
    auto f8 = Tower::extend_unchecked(f2, {1, 1, 0, 1});  // x^3 + x + 1
    std::set<BigInt> images;
    for (u64 k = 0; k < 8; ++k) {
        auto e = FieldElement::from_index(f8, 1, k);
        // the Euler-criterion predicates refuse characteristic 2 by design;
        // "everything is a square" falls out of the bijection check below
        CHECK_THROWS_AS(is_square(e), EvenCharacteristicError);
        images.insert(sqr(e).index());
    }
    CHECK(images.size() == 8);
    // trace takes both values; kernel of trace has size 4
    u64 trace_zero = 0;
    for (u64 k = 0; k < 8; ++k)
        if (trace(FieldElement::from_index(f8, 1, k), 0).is_zero()) ++trace_zero;
    CHECK(trace_zero == 4);
}

TEST_CASE("descriptor text parses back to an identical tower", "[tower][io]") {
    auto t = make_tower("2; 1,1,1; [1,1],1,1");
    REQUIRE(t->height() == 2);
    CHECK(t->cardinality(2) == 16);
    CHECK(descriptor_text(*t) == "2; 1,1,1; [1,1],1,1");

    auto e = FieldElement::generator(t, 2);
    auto round = parse_element(t, 2, element_to_text(e));
    CHECK(round == e);

    CHECK_THROWS_AS(make_tower("2; 1,0,1"), ModulusReducibleError);  // x^2 + 1 = (x+1)^2
    CHECK_THROWS_AS(make_tower(""), ParseError);
    CHECK_THROWS_AS(parse_element(t, 2, "[1,1"), ParseError);
}
