#include <doctest.h>

#include <random>
#include <vector>

#include "rtnc/codec.hpp"

using namespace rtnc;

namespace {

// Deterministic pseudo-random message matrix.
uint16_t w_of(int stream, int64_t t, int width) {
    uint64_t x = 0x9e3779b97f4a7c15ull * (stream + 1) + 0xbf58476d1ce4e5b9ull * (t + 1);
    x ^= x >> 31;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 29;
    return static_cast<uint16_t>(x & ((1u << width) - 1));
}

MessageFn messages(int width) {
    return [width](int stream, int64_t t) { return w_of(stream, t, width); };
}

}  // namespace

TEST_CASE("message store watermark and gaps") {
    MessageStore s;
    CHECK(s.watermark() == -1);
    CHECK(s.known(-5));
    CHECK(s.payload(-5) == 0);
    CHECK(s.insert(0, 7));
    CHECK(s.watermark() == 0);
    CHECK(s.insert(2, 9));  // gap at 1
    CHECK(s.watermark() == 0);
    CHECK(s.known(2));
    CHECK(s.payload(2) == 9);
    CHECK(s.insert(1, 8));
    CHECK(s.watermark() == 2);
    CHECK_FALSE(s.insert(2, 9));  // duplicate
    CHECK_THROWS_AS(s.payload(3), ProtocolViolation);
    CHECK_THROWS_AS((void)s.insert(2, 1), InternalError);  // conflicting re-decode
}

TEST_CASE("message store retention") {
    MessageStore s(4);
    for (int i = 0; i < 10; ++i)
        s.insert(i, static_cast<uint16_t>(i));
    CHECK(s.payload(9) == 9);
    CHECK(s.payload(6) == 6);
    CHECK_THROWS_AS(s.payload(3), InternalError);
}

TEST_CASE("line source schedule examples") {
    Field f(8);
    uint16_t k1 = 3, kM = 5;
    auto w = messages(8);
    // M=3, i=1, t=0: second term sits at timestamp -2 and vanishes.
    CHECK(line_sync_symbol(f, k1, kM, 3, 1, 0, w) == f.mul(k1, w(0, 0)));
    // M=3, i=1, t=5: k1 W1^5 + k3 W3^3.
    CHECK(line_sync_symbol(f, k1, kM, 3, 1, 5, w) ==
          Field::add(f.mul(k1, w(0, 5)), f.mul(kM, w(1, 3))));
    // M=2, i=1: k1 W1^t + k2 W2^(t-1).
    for (int64_t t = 0; t < 6; ++t)
        CHECK(line_sync_symbol(f, k1, kM, 2, 1, t, w) ==
              Field::add(f.mul(k1, w(0, t)), t >= 1 ? f.mul(kM, w(1, t - 1)) : uint16_t{0}));
}

TEST_CASE("line relay recursion reproduces the closed form") {
    for (int width : {2, 8}) {
        Field f(width);
        uint16_t k1 = 1, kM = (width == 2) ? 2 : 29;
        auto w = messages(width);
        for (int m : {3, 4, 5}) {
            auto x = [&](int node, int64_t t) -> uint16_t {
                return t < 0 ? 0 : line_sync_symbol(f, k1, kM, m, node, t, w);
            };
            for (int r = 2; r <= m - 1; ++r) {
                CHECK(x(r, 0) == 0);
                for (int64_t t = 0; t <= 50; ++t) {
                    uint16_t rec = Field::add(Field::add(x(r + 1, t - 1), x(r - 1, t - 1)),
                                              x(r, t - 2));
                    CHECK(rec == x(r, t));
                }
            }
        }
    }
}

TEST_CASE("star source schedule examples") {
    Field f(8);
    auto c = choose_triplets(f);
    auto w = messages(8);
    // t=0: only the own term (others at negative time).
    CHECK(star_sync_source_symbol(f, c, 0, 0, w) == f.mul(c.a[0], w(0, 0)));
    // t=5, i=1 (stream 0): k1 W1^4 + k2 W2^2 + k3 W3^2 with set b (odd slot).
    uint16_t expect = Field::add(
        f.mul(c.b[0], w(0, 4)), Field::add(f.mul(c.b[1], w(1, 2)), f.mul(c.b[2], w(2, 2))));
    CHECK(star_sync_source_symbol(f, c, 0, 5, w) == expect);
    // Consecutive slots use sets a then b.
    CHECK(star_sync_source_schedule(0, 4).kbit == 0);
    CHECK(star_sync_source_schedule(0, 5).kbit == 1);
}

TEST_CASE("star relay recursion reproduces the closed form") {
    for (int width : {2, 8}) {
        Field f(width);
        auto c = choose_triplets(f);
        auto w = messages(width);
        auto src = [&](int i, int64_t t) -> uint16_t {
            return t < 0 ? 0 : star_sync_source_symbol(f, c, i, t, w);
        };
        CHECK(star_sync_relay_symbol(f, c, 0, w) == 0);
        // t=4: all timestamps 2*floor(3/2) = 2.
        auto s4 = star_sync_relay_schedule(4);
        CHECK(s4.ts == std::array<int64_t, 3>{2, 2, 2});
        for (int64_t t = 0; t <= 50; ++t) {
            uint16_t rec =
                Field::add(Field::add(src(0, t - 1), src(1, t - 1)), src(2, t - 1));
            CHECK(rec == star_sync_relay_symbol(f, c, t, w));
        }
    }
}

TEST_CASE("line-star relay recursion reproduces the closed form") {
    for (int width : {2, 8}) {
        Field f(width);
        auto c = choose_triplets(f);
        auto w = messages(width);
        auto x1 = [&](int64_t t) -> uint16_t {
            return t < 0 ? 0 : star_sync_source_symbol(f, c, 0, t, w);
        };
        auto x4 = [&](int64_t t) -> uint16_t {
            return t < 0 ? 0 : linestar_sync_center_symbol(f, c, t, w);
        };
        auto x5 = [&](int64_t t) -> uint16_t {
            return t < 0 ? 0 : linestar_sync_line_relay_symbol(f, c, t, w);
        };
        CHECK(x5(0) == 0);
        // t=5: timestamps (4, 2, 2).
        auto s5 = linestar_sync_line_relay_schedule(5);
        CHECK(s5.ts == std::array<int64_t, 3>{4, 2, 2});
        for (int64_t t = 0; t <= 50; ++t) {
            uint16_t rec = Field::add(Field::add(x1(t - 1), x4(t - 1)), x5(t - 2));
            CHECK(rec == x5(t));
        }
    }
}

TEST_CASE("line-star center schedule freshness") {
    auto s = linestar_sync_center_schedule(6);
    CHECK(s.ts == std::array<int64_t, 3>{4, 4, 4});
    auto s7 = linestar_sync_center_schedule(7);
    CHECK(s7.ts == std::array<int64_t, 3>{4, 6, 6});
}
