#include <doctest.h>

#include "oracles.hpp"
#include "rtnc/field.hpp"

using rtnc::Field;

TEST_CASE("additive identities") {
    Field f(8);
    CHECK(Field::add(0x53, 0) == 0x53);
    CHECK(Field::add(0x53, 0x53) == 0);
    CHECK(Field::add(0b101, 0b011) == 0b110);
}

TEST_CASE("multiplicative identities") {
    Field f(8);
    CHECK(f.mul(0x53, 1) == 0x53);
    CHECK(f.mul(0x53, 0) == 0);
}

TEST_CASE("GF(2^3) product against polynomial reduction oracle") {
    Field f(3);
    CHECK(f.poly() == 0b1011);  // x^3 + x + 1
    CHECK(f.mul(0b010, 0b100) == 0b011);
    for (uint16_t x = 0; x < 8; ++x)
        for (uint16_t y = 0; y < 8; ++y)
            CHECK(f.mul(x, y) == oracle::gf_mul(x, y, f.poly(), 3));
}

TEST_CASE("field axioms hold exhaustively for small widths") {
    for (int w : {2, 3, 4}) {
        Field f(w);
        const int n = 1 << w;
        for (int x = 0; x < n; ++x) {
            if (x != 0) {
                CHECK(f.mul(x, f.inv(x)) == 1);
            }
            for (int y = 0; y < n; ++y) {
                CHECK(f.mul(x, y) == f.mul(y, x));
                for (int z = 0; z < n; ++z) {
                    CHECK(f.mul(f.mul(x, y), z) == f.mul(x, f.mul(y, z)));
                    CHECK(f.mul(x, Field::add(y, z)) ==
                          Field::add(f.mul(x, y), f.mul(x, z)));
                }
            }
        }
    }
}

TEST_CASE("mismatched inverse argument") {
    Field f(4);
    CHECK_THROWS_AS(f.inv(0), rtnc::ArgumentError);
}

TEST_CASE("primitive polynomials are primitive") {
    // Order of x must be 2^w - 1 in every supported field.
    for (int w = 2; w <= 16; ++w) {
        Field f(w);
        uint32_t group = (1u << w) - 1;
        uint16_t e = 1;
        uint32_t order = 0;
        for (uint32_t k = 1; k <= group; ++k) {
            e = f.mul(e, 2);
            if (e == 1) {
                order = k;
                break;
            }
        }
        CHECK(order == group);
    }
}

TEST_CASE("choose_triplets satisfies the determinant condition") {
    for (int w = 2; w <= 16; ++w) {
        Field f(w);
        auto t = rtnc::choose_triplets(f);
        CHECK(rtnc::triplets_valid(f, t));
        CHECK(t.a == std::array<uint16_t, 3>{1, 1, 1});
        CHECK(t.b == std::array<uint16_t, 3>{1, 2, 3});
    }
}

TEST_CASE("GF(2) admits no triplets") {
    Field f(1);
    CHECK_THROWS_AS(rtnc::choose_triplets(f), rtnc::InfeasibleError);
}

TEST_CASE("with a=[1,1,1] validity is exactly pairwise-distinct b") {
    for (int w : {2, 3}) {
        Field f(w);
        const uint16_t n = 1 << w;
        for (uint16_t b1 = 1; b1 < n; ++b1)
            for (uint16_t b2 = 1; b2 < n; ++b2)
                for (uint16_t b3 = 1; b3 < n; ++b3) {
                    rtnc::CoeffTriplets t{{1, 1, 1}, {b1, b2, b3}};
                    bool distinct = b1 != b2 && b2 != b3 && b1 != b3;
                    CHECK(rtnc::triplets_valid(f, t) == distinct);
                }
    }
}
