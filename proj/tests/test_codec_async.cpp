#include <doctest.h>

#include <deque>
#include <map>
#include <random>
#include <vector>

#include "rtnc/codec.hpp"

using namespace rtnc;

namespace {

uint16_t w_of(int stream, int64_t ord, int width) {
    uint64_t x = 0x9e3779b97f4a7c15ull * (stream + 11) + 0xbf58476d1ce4e5b9ull * (ord + 3);
    x ^= x >> 31;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 29;
    return static_cast<uint16_t>(x & ((1u << width) - 1));
}

// Minimal line-chain harness driving LineNodeCodec instances directly.
// Nodes 0..m-1; node 0 owns stream 0, node m-1 owns stream 1. Delay of the
// k-th transmission overall comes from `delays` ({1..D}), defaulting to 1.
struct LineHarness {
    int m;
    int width;
    int delay_bound;
    Field field{8};
    std::vector<LineNodeCodec> nodes;
    struct Flight {
        int to;
        int from_side;  // neighbor index at the receiver
        int64_t sent;
        int64_t arrival;
        LineHeader header;
        uint16_t payload;
    };
    std::vector<Flight> air;
    std::vector<std::map<int64_t, int64_t>> decode_slot;  // stream -> ord -> slot, per node
    std::vector<std::array<int64_t, 2>> watermark_hist;
    size_t draw = 0;
    const std::vector<int>* delays;

    LineHarness(int m_, int width_, int d, const std::vector<int>* dl)
        : m(m_), width(width_), delay_bound(d), field(width_), delays(dl) {
        for (int i = 0; i < m; ++i) {
            int nb = (i == 0 || i == m - 1) ? 1 : 2;
            int own = i == 0 ? 0 : (i == m - 1 ? 1 : -1);
            nodes.emplace_back(field, 3, 7, d, nb, own);
        }
        decode_slot.assign(2 * m, {});
    }

    int next_delay() {
        if (delays && draw < delays->size())
            return (*delays)[draw++];
        ++draw;
        return 1;
    }

    void run(int64_t horizon, int64_t gen_until) {
        for (int64_t t = 0; t < horizon; ++t) {
            // Deliver, ordered by send slot for deterministic reference growth.
            std::vector<Flight> due;
            for (auto it = air.begin(); it != air.end();) {
                if (it->arrival == t) {
                    due.push_back(*it);
                    it = air.erase(it);
                } else {
                    ++it;
                }
            }
            std::sort(due.begin(), due.end(), [](const Flight& a, const Flight& b) {
                return std::tie(a.sent, a.to, a.from_side) <
                       std::tie(b.sent, b.to, b.from_side);
            });
            for (const auto& fl : due) {
                auto decs = nodes[fl.to].receive(fl.from_side, fl.header, fl.payload);
                CHECK(decs.size() <= 1);  // instantly decodable
                for (const auto& d : decs) {
                    CHECK(d.payload == w_of(d.stream, d.ordinal, width));
                    decode_slot[fl.to * 2 + d.stream][d.ordinal] = t;
                }
            }
            // Generate, then everyone broadcasts once.
            if (t <= gen_until) {
                nodes[0].push_own(t, w_of(0, t, width));
                nodes[m - 1].push_own(t, w_of(1, t, width));
            }
            for (int i = 0; i < m; ++i) {
                auto e = nodes[i].encode();
                // Left neighbor sees us as its "right" side (index 1 unless
                // it is endpoint 0), right neighbor as its "left" (index 0).
                if (i > 0) {
                    int side = (i - 1 == 0) ? 0 : 1;
                    air.push_back({i - 1, side, t, t + next_delay(), e.header, e.payload});
                }
                if (i < m - 1)
                    air.push_back({i + 1, 0, t, t + next_delay(), e.header, e.payload});
            }
            // Subset property along the flow of stream 0: upstream nodes
            // always hold at least as much as downstream ones.
            for (int i = 0; i + 1 < m; ++i) {
                CHECK(nodes[i].store(0).watermark() >= nodes[i + 1].store(0).watermark());
                CHECK(nodes[i + 1].store(1).watermark() >= nodes[i].store(1).watermark());
            }
        }
    }
};

}  // namespace

TEST_CASE("fresh line codec emits the startup sentinel") {
    Field f(8);
    LineNodeCodec relay(f, 3, 7, 4, 2, -1);
    auto e = relay.encode();
    CHECK(e.payload == 0);
    CHECK(e.ordinals == std::array<int64_t, 2>{-1, -1});
    uint32_t sentinel = ordinal_to_wire(-1, index_width(4));
    CHECK(e.header.p == sentinel);
    CHECK(e.header.q == sentinel);
}

TEST_CASE("caught-up relay encodes the newest decoded pair") {
    Field f(8);
    LineNodeCodec relay(f, 3, 7, 4, 2, -1);
    for (int64_t i = 0; i <= 7; ++i)
        relay.receive_resolved({i, -1}, f.mul(3, w_of(0, i, 8)));
    for (int64_t i = 0; i <= 4; ++i)
        relay.receive_resolved({-1, i}, f.mul(7, w_of(1, i, 8)));
    for (int n = 0; n < 8; ++n)
        relay.encode();
    auto e = relay.encode();
    CHECK(e.ordinals == std::array<int64_t, 2>{7, 4});
    CHECK(e.payload == Field::add(f.mul(3, w_of(0, 7, 8)), f.mul(7, w_of(1, 4, 8))));
}

TEST_CASE("duplicate components are no-ops and conflicts raise") {
    Field f(8);
    LineNodeCodec relay(f, 3, 7, 2, 2, -1);
    auto d1 = relay.receive_resolved({0, -1}, f.mul(3, w_of(0, 0, 8)));
    REQUIRE(d1.size() == 1);
    CHECK(d1[0].stream == 0);
    CHECK(relay.receive_resolved({0, -1}, f.mul(3, w_of(0, 0, 8))).empty());
    // Both components unknown: nothing to subtract.
    CHECK_THROWS_AS(relay.receive_resolved({5, 9}, 1), ProtocolViolation);
}

TEST_CASE("line async, synchronized delays, reduces to the sync schedule") {
    // All delays 1: node 0 decodes W_M^(t) at t + (m-1) exactly.
    for (int m : {3, 4, 5}) {
        LineHarness h(m, 8, 1, nullptr);
        int64_t horizon = 30;
        h.run(horizon, horizon);
        int L = m - 1;
        for (int64_t ord = 0; ord + L < horizon; ++ord) {
            REQUIRE(h.decode_slot[0 * 2 + 1].count(ord));
            CHECK(h.decode_slot[0 * 2 + 1][ord] == ord + L);
            REQUIRE(h.decode_slot[(m - 1) * 2 + 0].count(ord));
            CHECK(h.decode_slot[(m - 1) * 2 + 0][ord] == ord + L);
        }
    }
}

TEST_CASE("line async exhaustive delay tuples at D=2") {
    // First six transmissions draw delays from {1,2}^6; the rest are 1.
    for (int m : {3, 4}) {
        int L = m - 1;
        for (uint32_t tuple = 0; tuple < (1u << 6); ++tuple) {
            std::vector<int> delays;
            for (int i = 0; i < 6; ++i)
                delays.push_back(1 + ((tuple >> i) & 1));
            LineHarness h(m, 8, 2, &delays);
            int64_t horizon = 26;
            int64_t gen_until = horizon - 2 * L - 2;
            h.run(horizon, gen_until);
            for (int64_t ord = 0; ord <= gen_until; ++ord) {
                REQUIRE(h.decode_slot[0 * 2 + 1].count(ord));
                CHECK(h.decode_slot[0 * 2 + 1][ord] <= ord + 2 * L);
                REQUIRE(h.decode_slot[(m - 1) * 2 + 0].count(ord));
                CHECK(h.decode_slot[(m - 1) * 2 + 0][ord] <= ord + 2 * L);
            }
        }
    }
}

TEST_CASE("line async randomized delays decode everything in bound") {
    std::mt19937_64 rng(1234);
    for (int d : {2, 3, 4}) {
        for (int m : {3, 4, 5}) {
            int L = m - 1;
            for (int trial = 0; trial < 30; ++trial) {
                std::vector<int> delays;
                for (int i = 0; i < 4000; ++i)
                    delays.push_back(1 + static_cast<int>(rng() % d));
                LineHarness h(m, 8, d, &delays);
                int64_t horizon = 40;
                int64_t gen_until = horizon - static_cast<int64_t>(L) * d - 1;
                h.run(horizon, gen_until);
                for (int64_t ord = 0; ord <= gen_until; ++ord) {
                    REQUIRE(h.decode_slot[0 * 2 + 1].count(ord));
                    CHECK(h.decode_slot[0 * 2 + 1][ord] <= ord + static_cast<int64_t>(L) * d);
                }
            }
        }
    }
}

TEST_CASE("star pair decode recovers two messages") {
    Field f(8);
    auto c = choose_triplets(f);
    // Source 0's view of the relay: packets pair up by (p,q,u).
    StarNodeCodec src(f, c, 2, 1, 0, 0);
    src.push_own(0, w_of(0, 0, 8));
    uint16_t w1 = w_of(1, 0, 8), w2 = w_of(2, 0, 8);
    auto pay = [&](uint32_t kbit) {
        const auto& k = kbit ? c.b : c.a;
        return Field::add(f.mul(k[0], w_of(0, 0, 8)),
                          Field::add(f.mul(k[1], w1), f.mul(k[2], w2)));
    };
    auto first = src.receive_resolved(0, {0, 0, 0}, 0, pay(0));
    CHECK(first.empty());
    CHECK(src.pending_pairs(0) == 1);
    auto second = src.receive_resolved(0, {0, 0, 0}, 1, pay(1));
    REQUIRE(second.size() == 2);
    CHECK(src.store(1).payload(0) == w1);
    CHECK(src.store(2).payload(0) == w2);
    CHECK(src.pending_pairs(0) == 0);
}

TEST_CASE("star all-unknown packet is a protocol violation") {
    Field f(8);
    auto c = choose_triplets(f);
    StarNodeCodec relay(f, c, 2, 3, -1, 0);
    CHECK_THROWS_AS(relay.receive_resolved(0, {0, 0, 0}, 0, 1), ProtocolViolation);
}

TEST_CASE("star relay single-decodes source packets") {
    Field f(8);
    auto c = choose_triplets(f);
    StarNodeCodec relay(f, c, 2, 3, -1, 0);
    // Source 1 echoes nothing yet: k1 W1^(0) alone.
    auto d = relay.receive_resolved(0, {0, -1, -1}, 0, f.mul(c.a[0], w_of(0, 0, 8)));
    REQUIRE(d.size() == 1);
    CHECK(d[0].stream == 0);
    CHECK(d[0].payload == w_of(0, 0, 8));
    // Duplicate from the b-phase packet.
    CHECK(relay.receive_resolved(0, {0, -1, -1}, 1, f.mul(c.b[0], w_of(0, 0, 8))).empty());
}

TEST_CASE("buffered pair halves decode once knowledge grows") {
    Field f(8);
    auto c = choose_triplets(f);
    StarNodeCodec src(f, c, 2, 1, 0, 0);
    src.push_own(0, w_of(0, 0, 8));
    src.push_own(1, w_of(0, 1, 8));
    uint16_t w1 = w_of(1, 0, 8), w2 = w_of(2, 0, 8);
    const auto& k = c.a;
    uint16_t pay = Field::add(f.mul(k[0], w_of(0, 1, 8)),
                              Field::add(f.mul(k[1], w1), f.mul(k[2], w2)));
    // Two unknowns: buffered.
    CHECK(src.receive_resolved(0, {1, 0, 0}, 0, pay).empty());
    // Stream 1's message arrives via a different packet; the buffered half
    // then resolves stream 2 by itself.
    uint16_t single = Field::add(f.mul(c.b[0], w_of(0, 0, 8)), f.mul(c.b[1], w1));
    auto d = src.receive_resolved(0, {0, 0, -1}, 1, single);
    REQUIRE(d.size() == 2);
    CHECK(src.store(2).payload(0) == w2);
}
