#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <vector>

#include "rtnc/field.hpp"
#include "rtnc/header.hpp"

namespace rtnc {

// Decoded message history of one stream at one node. Ordinals count messages
// (for rate-C/2 streams the generation slot is twice the ordinal); negative
// ordinals are the zero symbol. The watermark is the end of the contiguous
// decoded prefix; out-of-order arrivals wait in a pending set.
class MessageStore {
public:
    explicit MessageStore(int64_t retention = -1) : retention_(retention) {}

    bool known(int64_t ordinal) const;
    uint16_t payload(int64_t ordinal) const;
    // False for duplicates; re-decodes must agree with the stored value.
    bool insert(int64_t ordinal, uint16_t payload);
    int64_t watermark() const { return watermark_; }

private:
    int64_t watermark_ = -1;
    int64_t lowest_ = 0;  // lowest retained ordinal
    std::deque<uint16_t> window_;
    std::map<int64_t, uint16_t> pending_;
    int64_t retention_;
};

// ---------------------------------------------------------------------------
// Synchronized schedules (all delays equal one).
//
// Timestamps are slot indices; lookups at negative timestamps must return 0.
using MessageFn = std::function<uint16_t(int stream, int64_t timestamp)>;

int64_t even_floor(int64_t x);  // 2 * floor(x / 2)

// Line with M nodes, sources at 1 and M, streams 0 (node 1) and 1 (node M).
// Node r transmits k1*W1^(t-(r-1)) + kM*WM^(t-(M-r)).
std::array<int64_t, 2> line_sync_schedule(int m, int node, int64_t t);
uint16_t line_sync_symbol(const Field& f, uint16_t k1, uint16_t kM, int m, int node, int64_t t,
                          const MessageFn& w);

// Coefficient set alternates with slot parity: even slots a, odd slots b.
const std::array<uint16_t, 3>& coeff_set(const CoeffTriplets& c, int64_t t);

// A star-family emission: per-stream message timestamps plus the coefficient
// set bit the packet carries.
struct ScheduledStarSymbol {
    std::array<int64_t, 3> ts{-1, -1, -1};
    uint32_t kbit = 0;
};

uint16_t eval_star_schedule(const Field& f, const CoeffTriplets& c,
                            const ScheduledStarSymbol& s, const MessageFn& w);

// Star around one relay; sources are streams 0..2.
ScheduledStarSymbol star_sync_source_schedule(int i, int64_t t);
ScheduledStarSymbol star_sync_relay_schedule(int64_t t);
uint16_t star_sync_source_symbol(const Field& f, const CoeffTriplets& c, int i, int64_t t,
                                 const MessageFn& w);
uint16_t star_sync_relay_symbol(const Field& f, const CoeffTriplets& c, int64_t t,
                                const MessageFn& w);

// Canonical line-star: source 0 -- line relay -- center -- sources 1, 2.
// Sources code exactly like star sources; the center and the line relay
// carry stream 0 one extra hop.
ScheduledStarSymbol linestar_sync_center_schedule(int64_t t);
ScheduledStarSymbol linestar_sync_line_relay_schedule(int64_t t);
uint16_t linestar_sync_center_symbol(const Field& f, const CoeffTriplets& c, int64_t t,
                                     const MessageFn& w);
uint16_t linestar_sync_line_relay_symbol(const Field& f, const CoeffTriplets& c, int64_t t,
                                         const MessageFn& w);

// ---------------------------------------------------------------------------
// Unsynchronized codecs (arbitrary delays in [1, D]).

struct Decoded {
    int stream;
    int64_t ordinal;
    uint16_t payload;
};

// One node of a bidirectional line deployment. Streams: 0 originates at the
// front endpoint, 1 at the back endpoint. Every slot the node broadcasts one
// packet combining its per-stream forwarding cursors; decoding subtracts the
// known component. Per-neighbor references resolve the modular header
// indices.
class LineNodeCodec {
public:
    LineNodeCodec(const Field& f, uint16_t k_front, uint16_t k_back, int delay_bound,
                  int num_neighbors, int own_stream /* -1 for relays */,
                  int64_t retention = -1);

    void push_own(int64_t ordinal, uint16_t payload);

    struct Encoded {
        LineHeader header;
        uint16_t payload = 0;
        std::array<int64_t, 2> ordinals{-1, -1};
    };
    Encoded encode();

    // Wire path: resolves the modular header indices against per-neighbor
    // references first.
    std::vector<Decoded> receive(int neighbor, const LineHeader& raw, uint16_t payload);
    // Absolute-ordinal path (synchronized schedules bypass the wire format).
    std::vector<Decoded> receive_resolved(const std::array<int64_t, 2>& ords, uint16_t payload);

    const MessageStore& store(int stream) const { return store_[stream]; }
    int64_t cursor(int stream) const { return cursor_[stream]; }
    int own_stream() const { return own_stream_; }

private:
    const Field& field_;
    std::array<uint16_t, 2> k_;
    int width_;
    int own_stream_;
    std::array<MessageStore, 2> store_;
    std::array<int64_t, 2> cursor_{-1, -1};
    std::vector<std::array<int64_t, 2>> ref_;
};

// One node of a star or generalized line-star deployment (three streams).
// Emissions come in coefficient-set pairs: a pair opens on slots with the
// configured anchor parity, captures the current cursor triple, and repeats
// it with set b on the following slot. Receivers decode single-unknown
// packets immediately and buffer one packet per unmatched (p,q,u) triple
// until its pair partner arrives.
class StarNodeCodec {
public:
    StarNodeCodec(const Field& f, const CoeffTriplets& coeffs, int delay_bound,
                  int num_neighbors, int own_stream /* -1 for relays */, int anchor_parity,
                  int64_t retention = -1);

    void push_own(int64_t ordinal, uint16_t payload);

    struct Encoded {
        StarHeader header;
        uint16_t payload = 0;
        std::array<int64_t, 3> ordinals{-1, -1, -1};
    };
    Encoded encode(int64_t slot);

    std::vector<Decoded> receive(int neighbor, const StarHeader& raw, uint16_t payload);
    std::vector<Decoded> receive_resolved(int neighbor, const std::array<int64_t, 3>& ords,
                                          uint32_t kbit, uint16_t payload);

    const MessageStore& store(int stream) const { return store_[stream]; }
    size_t pending_pairs(int neighbor) const { return pending_[neighbor].size(); }

private:
    const Field& field_;
    CoeffTriplets coeffs_;
    int width_;
    int own_stream_;
    int anchor_parity_;
    bool pair_open_ = false;
    std::array<int64_t, 3> pair_ords_{-1, -1, -1};
    std::array<MessageStore, 3> store_;
    std::array<int64_t, 3> cursor_{-1, -1, -1};
    std::vector<std::array<int64_t, 3>> ref_;
    // One buffered half per unknown pair: key = (stream j, ord j, stream l,
    // ord l); value keeps the packet so knowns are re-subtracted at solve
    // time.
    struct PendingHalf {
        std::array<int64_t, 3> ords;
        uint32_t kbit;
        uint16_t payload;
    };
    std::vector<std::map<std::array<int64_t, 4>, PendingHalf>> pending_;

    const std::array<uint16_t, 3>& set_of(uint32_t kbit) const {
        return kbit ? coeffs_.b : coeffs_.a;
    }
};

}  // namespace rtnc
