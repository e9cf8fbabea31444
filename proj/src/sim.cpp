#include "rtnc/sim.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <tuple>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace rtnc {

namespace {

uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct Arrival {
    int64_t send_slot;
    int sender;    // flat node position inside the runtime
    int receiver;
    int neighbor_idx;    // receiver-side neighbor index of the sender
    int wireless_edge;   // for the trace
    std::vector<uint8_t> bytes;
};

struct Engine;

struct Runtime {
    virtual ~Runtime() = default;
    virtual void deliver_and_generate(int64_t t, Engine& eng) = 0;
    virtual void emit(int64_t t, Engine& eng) = 0;
    virtual void finalize(Engine& eng) = 0;
    virtual int max_distance() const = 0;
};

struct Engine {
    const SimConfig& cfg;
    const WiredGraph& g;
    Field field;
    std::optional<CoeffTriplets> coeffs;
    std::mt19937_64 delay_rng;
    size_t delay_draws = 0;
    SimTrace trace;
    int64_t gen_until = 0;
    std::map<std::tuple<int, int, int>, int64_t> fifo_last;  // (block, sender, receiver)

    explicit Engine(const SimConfig& c)
        : cfg(c), g(*c.graph), field(c.field_width), delay_rng(c.delay.seed) {
        if (c.field_width >= 2)
            coeffs = choose_triplets(field);
    }

    int draw_delay(int block, int sender, int receiver) {
        int d = 1;
        switch (cfg.delay.kind) {
        case DelayModel::Fixed1:
            d = 1;
            ++delay_draws;
            break;
        case DelayModel::Uniform:
            d = 1 + static_cast<int>(delay_rng() % static_cast<uint64_t>(cfg.delay.bound));
            ++delay_draws;
            break;
        case DelayModel::Adversarial:
            d = delay_draws < cfg.delay.list.size() ? cfg.delay.list[delay_draws] : 1;
            ++delay_draws;
            break;
        }
        if (d < 1 || d > cfg.delay.bound)
            throw InternalError("delay draw outside [1, D]");
        (void)block;
        (void)sender;
        (void)receiver;
        return d;
    }

    int64_t fifo_adjust(int block, int sender, int receiver, int64_t arrival) {
        if (!cfg.delay.per_edge_fifo)
            return arrival;
        auto key = std::make_tuple(block, sender, receiver);
        auto it = fifo_last.find(key);
        if (it != fifo_last.end())
            arrival = std::max(arrival, it->second);
        fifo_last[key] = arrival;
        return arrival;
    }

    uint16_t payload_of(int block_key, int origin, int64_t ordinal) {
        uint64_t x = splitmix(cfg.payload_seed ^ splitmix((uint64_t)block_key * 1000003u +
                                                          (uint64_t)origin));
        x = splitmix(x ^ (uint64_t)(ordinal + 1));
        return static_cast<uint16_t>(x & field.mask());
    }

    void on_send(int64_t t, int node, const std::vector<uint8_t>& bytes, int block_idx,
                 int in_window = -1) {
        bool src = g.wireless().is_source(node);
        bool windowed = in_window >= 0 ? in_window != 0 : t <= gen_until;
        if (windowed) {
            auto& c = trace.per_block[block_idx];
            (src ? c.source_sends_window : c.relay_sends_window) += 1;
        }
        (src ? trace.source_tx : trace.relay_tx) += 1;
        if (cfg.record_events)
            trace.events.push_back({t, node, -1, TraceEvent::Send, hex_dump(bytes), ""});
    }

    void on_recv(int64_t t, int node, int wireless_edge, const std::vector<uint8_t>& bytes) {
        if (cfg.record_events)
            trace.events.push_back({t, node, wireless_edge, TraceEvent::Recv,
                                    hex_dump(bytes), ""});
    }

    void on_decode(int64_t t, int block, int origin, int dest, int64_t ordinal,
                   int64_t gen_slot, uint16_t value, int wireless_edge) {
        trace.decodes.push_back({block, origin, dest, ordinal, gen_slot, t});
        auto key = std::make_pair(origin, dest);
        auto it = trace.max_delay.find(key);
        int64_t delay = t - gen_slot;
        if (it == trace.max_delay.end() || it->second < delay)
            trace.max_delay[key] = delay;
        ++trace.delivered;
        if (cfg.record_events) {
            std::vector<uint8_t> v{static_cast<uint8_t>(value >> 8),
                                   static_cast<uint8_t>(value & 0xff)};
            trace.events.push_back({t, dest, wireless_edge, TraceEvent::Decode, "",
                                    hex_dump(v)});
        }
    }
};

// Broadcast from a runtime node to its listed neighbors.
template <typename Neighbors>
void broadcast(Engine& eng, int block_idx, std::map<int64_t, std::vector<Arrival>>& inbox,
               int64_t t, int sender_pos, const Neighbors& neighbors,
               const std::vector<uint8_t>& bytes, int sender_node, int in_window = -1) {
    eng.on_send(t, sender_node, bytes, block_idx, in_window);
    for (const auto& [pos, nb_idx, wedge] : neighbors) {
        int d = eng.draw_delay(block_idx, sender_pos, pos);
        int64_t arr = eng.fifo_adjust(block_idx, sender_pos, pos, t + d);
        inbox[arr].push_back({t, sender_pos, pos, nb_idx, wedge, bytes});
    }
}

// Re-throw codec protocol violations with the offending event's context.
template <typename Fn>
auto with_event_context(int64_t slot, int node, Fn&& fn) {
    try {
        return fn();
    } catch (const ProtocolViolation& e) {
        throw ProtocolViolation("slot " + std::to_string(slot) + ", node " +
                                std::to_string(node) + ": " + e.what());
    }
}

std::vector<Arrival> take_due(std::map<int64_t, std::vector<Arrival>>& inbox, int64_t t) {
    std::vector<Arrival> due;
    auto it = inbox.find(t);
    if (it != inbox.end()) {
        due = std::move(it->second);
        inbox.erase(it);
    }
    std::sort(due.begin(), due.end(), [](const Arrival& a, const Arrival& b) {
        return std::tie(a.send_slot, a.sender, a.receiver) <
               std::tie(b.send_slot, b.sender, b.receiver);
    });
    return due;
}

// Wireless edge between two wireless node ids along a block path (for trace
// labels); -1 when absent.
int wireless_edge_between(const WiredGraph& g, int u, int v) {
    for (const auto& e : g.wireless().edges())
        if ((e.u == u && e.v == v) || (e.u == v && e.v == u))
            return e.id;
    return -1;
}

std::vector<int> chain_nodes_of_path(const WiredGraph& g, const std::vector<int>& path) {
    std::vector<int> nodes;
    nodes.push_back(g.nodes()[g.edges()[path.front()].from].base);
    for (int eid : path) {
        const auto& e = g.edges()[eid];
        if (!e.broadcast)
            nodes.push_back(g.nodes()[e.to].base);
    }
    return nodes;
}

struct ChainNeighbor {
    int pos;
    int nb_idx;
    int wedge;
};

// ---------------------------------------------------------------------------
// Asynchronous bidirectional line over one chain of nodes.
struct ChainAsync : Runtime {
    int block_idx;
    int wire_id;
    int h_blocks;
    int D;
    std::vector<int> nodes;
    std::array<int, 2> ends;
    std::array<int, 2> stream_key;  // payload key per stream (ring paths share)
    std::vector<LineNodeCodec> codecs;
    std::map<int64_t, std::vector<Arrival>> inbox;
    int width;

    ChainAsync(Engine& eng, int block_idx_, int wire_id_, int h_blocks_,
               std::vector<int> nodes_, std::array<int, 2> keys)
        : block_idx(block_idx_), wire_id(wire_id_), h_blocks(h_blocks_),
          D(eng.cfg.delay.bound), nodes(std::move(nodes_)),
          ends{nodes.front(), nodes.back()}, stream_key(keys),
          width(eng.cfg.field_width) {
        uint16_t k0 = 1;
        uint16_t k1 = eng.field.width() >= 2 ? 2 : 1;
        for (size_t i = 0; i < nodes.size(); ++i) {
            int nb = (i == 0 || i + 1 == nodes.size()) ? 1 : 2;
            int own = i == 0 ? 0 : (i + 1 == nodes.size() ? 1 : -1);
            codecs.emplace_back(eng.field, k0, k1, D, nb, own, eng.cfg.retention);
        }
    }

    std::vector<ChainNeighbor> neighbors_of(Engine& eng, size_t i) const {
        std::vector<ChainNeighbor> out;
        if (i > 0)
            out.push_back({static_cast<int>(i - 1), i - 1 == 0 ? 0 : 1,
                           wireless_edge_between(eng.g, nodes[i], nodes[i - 1])});
        if (i + 1 < nodes.size())
            out.push_back({static_cast<int>(i + 1), 0,
                           wireless_edge_between(eng.g, nodes[i], nodes[i + 1])});
        return out;
    }

    void deliver_and_generate(int64_t t, Engine& eng) override {
        for (const auto& a : take_due(inbox, t)) {
            eng.on_recv(t, nodes[a.receiver], a.wireless_edge, a.bytes);
            BitReader r(a.bytes.data(), a.bytes.size());
            int iw = index_width(D);
            LineHeader h{r.get(iw), r.get(iw)};
            int bw = block_id_width(h_blocks);
            int got_block = bw ? static_cast<int>(r.get(bw)) : 0;
            if (bw && got_block != (wire_id & ((1 << bw) - 1)))
                throw ProtocolViolation("packet block id does not match its edge's block");
            uint16_t payload = static_cast<uint16_t>(r.get(width));
            auto decs = with_event_context(t, nodes[a.receiver], [&] {
                return codecs[a.receiver].receive(a.neighbor_idx, h, payload);
            });
            for (const auto& d : decs) {
                uint16_t expect = eng.payload_of(stream_key[d.stream], ends[d.stream],
                                                 d.ordinal);
                if (d.payload != expect)
                    throw InternalError("decoded symbol differs from the generated one");
                bool at_end = (a.receiver == 0 && d.stream == 1) ||
                              (a.receiver + 1 == static_cast<int>(nodes.size()) &&
                               d.stream == 0);
                if (at_end)
                    eng.on_decode(t, block_idx, ends[d.stream], nodes[a.receiver],
                                  d.ordinal, d.ordinal, d.payload, a.wireless_edge);
            }
        }
        codecs.front().push_own(t, eng.payload_of(stream_key[0], ends[0], t));
        codecs.back().push_own(t, eng.payload_of(stream_key[1], ends[1], t));
        if (t <= eng.gen_until)
            ++eng.trace.per_block[block_idx].epochs;
    }

    void emit(int64_t t, Engine& eng) override {
        for (size_t i = 0; i < nodes.size(); ++i) {
            auto e = codecs[i].encode();
            auto bytes = pack_packet(e.header, D, wire_id & ((1 << block_id_width(h_blocks)) - 1),
                                     h_blocks, e.payload, width);
            broadcast(eng, block_idx, inbox, t, static_cast<int>(i), neighbors_of(eng, i),
                      bytes, nodes[i]);
        }
    }

    void finalize(Engine& eng) override {
        if (codecs.front().store(1).watermark() < eng.gen_until ||
            codecs.back().store(0).watermark() < eng.gen_until)
            throw InternalError("line block failed to deliver every message in the horizon");
    }

    int max_distance() const override { return static_cast<int>(nodes.size()) - 1; }
};

// ---------------------------------------------------------------------------
// Synchronized line: relays run the literal recursion on received symbols,
// endpoints decode by schedule.
struct ChainSync : Runtime {
    int block_idx;
    std::vector<int> nodes;
    std::array<int, 2> ends;
    std::array<int, 2> stream_key;
    LineNodeCodec front, back;
    struct RelayState {
        uint16_t hist1 = 0;  // own emission at t-1
        uint16_t hist2 = 0;  // own emission at t-2
        uint16_t in_low = 0;
        uint16_t in_high = 0;
    };
    std::vector<RelayState> relays;  // index 1..n-2 used
    std::map<int64_t, std::vector<Arrival>> inbox;
    int width;
    uint16_t k0, k1;

    ChainSync(Engine& eng, int block_idx_, std::vector<int> nodes_, std::array<int, 2> keys)
        : block_idx(block_idx_), nodes(std::move(nodes_)),
          ends{nodes.front(), nodes.back()}, stream_key(keys),
          front(eng.field, 1, eng.field.width() >= 2 ? 2 : 1, 1, 1, 0, eng.cfg.retention),
          back(eng.field, 1, eng.field.width() >= 2 ? 2 : 1, 1, 1, 1, eng.cfg.retention),
          relays(nodes.size()), width(eng.cfg.field_width), k0(1),
          k1(eng.field.width() >= 2 ? 2 : 1) {}

    std::vector<ChainNeighbor> neighbors_of(Engine& eng, size_t i) const {
        std::vector<ChainNeighbor> out;
        if (i > 0)
            out.push_back({static_cast<int>(i - 1), i - 1 == 0 ? 0 : 1,
                           wireless_edge_between(eng.g, nodes[i], nodes[i - 1])});
        if (i + 1 < nodes.size())
            out.push_back({static_cast<int>(i + 1), 0,
                           wireless_edge_between(eng.g, nodes[i], nodes[i + 1])});
        return out;
    }

    void deliver_and_generate(int64_t t, Engine& eng) override {
        int m = static_cast<int>(nodes.size());
        for (const auto& a : take_due(inbox, t)) {
            eng.on_recv(t, nodes[a.receiver], a.wireless_edge, a.bytes);
            uint16_t sym = static_cast<uint16_t>((a.bytes[0] << 8) | a.bytes[1]);
            if (a.receiver == 0 || a.receiver == m - 1) {
                auto ts = line_sync_schedule(m, a.sender + 1, a.send_slot);
                auto& codec = a.receiver == 0 ? front : back;
                auto decs = codec.receive_resolved({ts[0], ts[1]}, sym);
                for (const auto& d : decs) {
                    uint16_t expect = eng.payload_of(stream_key[d.stream], ends[d.stream],
                                                     d.ordinal);
                    if (d.payload != expect)
                        throw InternalError("sync line decoded a wrong symbol");
                    eng.on_decode(t, block_idx, ends[d.stream], nodes[a.receiver], d.ordinal,
                                  d.ordinal, d.payload, a.wireless_edge);
                }
            } else {
                auto& rs = relays[a.receiver];
                if (a.sender < a.receiver)
                    rs.in_low = sym;
                else
                    rs.in_high = sym;
            }
        }
        front.push_own(t, eng.payload_of(stream_key[0], ends[0], t));
        back.push_own(t, eng.payload_of(stream_key[1], ends[1], t));
        if (t <= eng.gen_until)
            ++eng.trace.per_block[block_idx].epochs;
    }

    void emit(int64_t t, Engine& eng) override {
        int m = static_cast<int>(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) {
            uint16_t sym;
            if (i == 0 || i + 1 == nodes.size()) {
                auto& codec = i == 0 ? front : back;
                auto ts = line_sync_schedule(m, static_cast<int>(i) + 1, t);
                sym = Field::add(
                    eng.field.mul(k0, codec.store(0).payload(ts[0])),
                    eng.field.mul(k1, codec.store(1).payload(ts[1])));
            } else {
                auto& rs = relays[i];
                sym = Field::add(Field::add(rs.in_low, rs.in_high), rs.hist2);
                rs.hist2 = rs.hist1;
                rs.hist1 = sym;
                rs.in_low = rs.in_high = 0;
            }
            std::vector<uint8_t> bytes{static_cast<uint8_t>(sym >> 8),
                                       static_cast<uint8_t>(sym & 0xff)};
            broadcast(eng, block_idx, inbox, t, static_cast<int>(i), neighbors_of(eng, i),
                      bytes, nodes[i]);
        }
    }

    void finalize(Engine& eng) override {
        if (front.store(1).watermark() < eng.gen_until ||
            back.store(0).watermark() < eng.gen_until)
            throw InternalError("sync line block failed to deliver every message");
    }

    int max_distance() const override { return static_cast<int>(nodes.size()) - 1; }
};

// ---------------------------------------------------------------------------
// Star-family deployment (pure star, generalized line-star) with async
// codecs. Arms run from the center to each source.
struct StarAsync : Runtime {
    int block_idx;
    int wire_id;
    int h_blocks;
    int D;
    struct NodeRt {
        int wireless;
        int own_stream;  // -1 relay
        std::vector<ChainNeighbor> neighbors;
    };
    std::vector<NodeRt> flat;
    std::vector<StarNodeCodec> codecs;
    std::array<int, 3> sources;     // wireless ids per stream
    std::array<int, 3> source_pos;  // flat positions
    int key;
    std::map<int64_t, std::vector<Arrival>> inbox;
    int width;
    int L = 0;

    StarAsync(Engine& eng, int block_idx_, int wire_id_, int h_blocks_, int center,
              const std::array<std::vector<int>, 3>& arms, int key_)
        : block_idx(block_idx_), wire_id(wire_id_), h_blocks(h_blocks_),
          D(eng.cfg.delay.bound), key(key_), width(eng.cfg.field_width) {
        // Flatten: center first, then each arm outward.
        std::map<int, int> pos_of;
        auto add_node = [&](int w) {
            if (pos_of.count(w))
                return pos_of[w];
            int pos = static_cast<int>(flat.size());
            pos_of[w] = pos;
            flat.push_back({w, -1, {}});
            return pos;
        };
        add_node(center);
        for (int s = 0; s < 3; ++s) {
            const auto& arm = arms[s];  // center ... source
            for (size_t k = 1; k < arm.size(); ++k) {
                int prev = pos_of.at(arm[k - 1]);
                int cur = add_node(arm[k]);
                int wedge = wireless_edge_between(eng.g, arm[k - 1], arm[k]);
                flat[prev].neighbors.push_back(
                    {cur, static_cast<int>(flat[cur].neighbors.size()), wedge});
                flat[cur].neighbors.push_back(
                    {prev, static_cast<int>(flat[prev].neighbors.size()) - 1, wedge});
            }
            int src = arm.empty() ? center : arm.back();
            sources[s] = src;
            source_pos[s] = pos_of.at(src);
            flat[pos_of.at(src)].own_stream = s;
        }
        // Pairwise distances between sources set the drain margin.
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                L = std::max(L, static_cast<int>(arms[a].size() + arms[b].size()) - 2);
        for (size_t pos = 0; pos < flat.size(); ++pos) {
            const auto& n = flat[pos];
            // Pair providers (the center and arm relays) anchor their pair
            // boundaries by the delay parity; leaf sources stay aligned with
            // the even generation slots.
            bool provides_pairs = pos == 0 || n.own_stream < 0;
            int anchor = provides_pairs ? (D % 2) : 0;
            codecs.emplace_back(eng.field, *eng.coeffs, D,
                                static_cast<int>(n.neighbors.size()), n.own_stream, anchor,
                                eng.cfg.retention);
        }
    }

    void deliver_and_generate(int64_t t, Engine& eng) override {
        for (const auto& a : take_due(inbox, t)) {
            eng.on_recv(t, flat[a.receiver].wireless, a.wireless_edge, a.bytes);
            BitReader r(a.bytes.data(), a.bytes.size());
            int iw = index_width(D);
            StarHeader h{r.get(iw), r.get(iw), r.get(iw), r.get(1)};
            int bw = block_id_width(h_blocks);
            int got_block = bw ? static_cast<int>(r.get(bw)) : 0;
            if (bw && got_block != (wire_id & ((1 << bw) - 1)))
                throw ProtocolViolation("packet block id does not match its edge's block");
            uint16_t payload = static_cast<uint16_t>(r.get(width));
            auto decs = with_event_context(t, flat[a.receiver].wireless, [&] {
                return codecs[a.receiver].receive(a.neighbor_idx, h, payload);
            });
            record(eng, t, a.receiver, decs, a.wireless_edge);
        }
        if (t % 2 == 0) {
            for (int s = 0; s < 3; ++s)
                codecs[source_pos[s]].push_own(t / 2, eng.payload_of(key, sources[s], t / 2));
            if (t <= eng.gen_until)
                ++eng.trace.per_block[block_idx].epochs;
        }
    }

    void record(Engine& eng, int64_t t, int pos, const std::vector<Decoded>& decs,
                int wedge) {
        for (const auto& d : decs) {
            uint16_t expect = eng.payload_of(key, sources[d.stream], d.ordinal);
            if (d.payload != expect)
                throw InternalError("star decoded a wrong symbol");
            int own = flat[pos].own_stream;
            if (own >= 0 && own != d.stream)
                eng.on_decode(t, block_idx, sources[d.stream], flat[pos].wireless, d.ordinal,
                              2 * d.ordinal, d.payload, wedge);
        }
    }

    void emit(int64_t t, Engine& eng) override {
        int in_window = t <= (eng.gen_until / 2) * 2 + 1 ? 1 : 0;
        for (size_t i = 0; i < flat.size(); ++i) {
            auto e = codecs[i].encode(t);
            auto bytes = pack_packet(e.header, D, wire_id & ((1 << block_id_width(h_blocks)) - 1),
                                     h_blocks, e.payload, width);
            broadcast(eng, block_idx, inbox, t, static_cast<int>(i), flat[i].neighbors, bytes,
                      flat[i].wireless, in_window);
        }
    }

    void finalize(Engine& eng) override {
        int64_t last_ord = eng.gen_until / 2;
        for (int s = 0; s < 3; ++s)
            for (int o = 0; o < 3; ++o)
                if (o != s && codecs[source_pos[s]].store(o).watermark() < last_ord)
                    throw InternalError("star block failed to deliver every message");
    }

    int max_distance() const override { return L; }
};

// ---------------------------------------------------------------------------
// Synchronized pure star (three sources around one relay).
struct StarSyncPure : Runtime {
    int block_idx;
    std::array<int, 3> sources;
    int relay;
    int key;
    std::vector<StarNodeCodec> src_codecs;  // one per source
    uint16_t relay_in[3] = {0, 0, 0};
    std::map<int64_t, std::vector<Arrival>> inbox;
    // Flat positions: 0..2 sources, 3 relay.
    std::array<std::array<int, 3>, 4> wedge{};

    StarSyncPure(Engine& eng, int block_idx_, const std::array<int, 3>& sources_, int relay_,
                 int key_)
        : block_idx(block_idx_), sources(sources_), relay(relay_), key(key_) {
        for (int s = 0; s < 3; ++s) {
            src_codecs.emplace_back(eng.field, *eng.coeffs, 1, 1, s, 0, eng.cfg.retention);
            wedge[s][0] = wireless_edge_between(eng.g, sources[s], relay);
        }
    }

    void deliver_and_generate(int64_t t, Engine& eng) override {
        for (const auto& a : take_due(inbox, t)) {
            int recv_node = a.receiver == 3 ? relay : sources[a.receiver];
            eng.on_recv(t, recv_node, a.wireless_edge, a.bytes);
            uint16_t sym = static_cast<uint16_t>((a.bytes[0] << 8) | a.bytes[1]);
            if (a.receiver == 3) {
                relay_in[a.sender] = sym;
            } else {
                auto sched = star_sync_relay_schedule(a.send_slot);
                std::array<int64_t, 3> ords;
                for (int s = 0; s < 3; ++s)
                    ords[s] = sched.ts[s] < 0 ? -1 : sched.ts[s] / 2;
                auto decs = src_codecs[a.receiver].receive_resolved(0, ords, sched.kbit, sym);
                for (const auto& d : decs) {
                    uint16_t expect = eng.payload_of(key, sources[d.stream], d.ordinal);
                    if (d.payload != expect)
                        throw InternalError("sync star decoded a wrong symbol");
                    eng.on_decode(t, block_idx, sources[d.stream], sources[a.receiver],
                                  d.ordinal, 2 * d.ordinal, d.payload, a.wireless_edge);
                }
            }
        }
        if (t % 2 == 0) {
            for (int s = 0; s < 3; ++s)
                src_codecs[s].push_own(t / 2, eng.payload_of(key, sources[s], t / 2));
            if (t <= eng.gen_until)
                ++eng.trace.per_block[block_idx].epochs;
        }
    }

    void emit(int64_t t, Engine& eng) override {
        // Sources follow the schedule from their stores; the relay sums its
        // inputs from the previous slot.
        int in_window = t <= (eng.gen_until / 2) * 2 + 1 ? 1 : 0;
        for (int s = 0; s < 3; ++s) {
            auto sched = star_sync_source_schedule(s, t);
            const auto& k = sched.kbit ? eng.coeffs->b : eng.coeffs->a;
            uint16_t sym = 0;
            for (int m = 0; m < 3; ++m) {
                int64_t ord = sched.ts[m] < 0 ? -1 : sched.ts[m] / 2;
                sym = Field::add(sym, eng.field.mul(k[m], src_codecs[s].store(m).payload(ord)));
            }
            std::vector<uint8_t> bytes{static_cast<uint8_t>(sym >> 8),
                                       static_cast<uint8_t>(sym & 0xff)};
            std::vector<ChainNeighbor> nb{{3, s, wedge[s][0]}};
            broadcast(eng, block_idx, inbox, t, s, nb, bytes, sources[s], in_window);
        }
        uint16_t relay_sym =
            Field::add(Field::add(relay_in[0], relay_in[1]), relay_in[2]);
        relay_in[0] = relay_in[1] = relay_in[2] = 0;
        std::vector<uint8_t> bytes{static_cast<uint8_t>(relay_sym >> 8),
                                   static_cast<uint8_t>(relay_sym & 0xff)};
        std::vector<ChainNeighbor> nb;
        for (int s = 0; s < 3; ++s)
            nb.push_back({s, 0, wedge[s][0]});
        broadcast(eng, block_idx, inbox, t, 3, nb, bytes, relay, in_window);
    }

    void finalize(Engine& eng) override {
        int64_t last_ord = eng.gen_until / 2;
        for (int s = 0; s < 3; ++s)
            for (int o = 0; o < 3; ++o)
                if (o != s && src_codecs[s].store(o).watermark() < last_ord)
                    throw InternalError("sync star failed to deliver every message");
    }

    int max_distance() const override { return 2; }
};

// ---------------------------------------------------------------------------
// Synchronized canonical line-star (far source - line relay - center - two
// sources). Emissions follow the closed-form schedules over the message
// matrix; sinks decode honestly from received packets.
struct LineStarSyncCanonical : Runtime {
    int block_idx;
    // flat positions: 0 far source, 1 line relay, 2 center, 3, 4 near sources
    std::array<int, 5> node;
    int key;
    std::vector<StarNodeCodec> src_codecs;  // far, near1, near2 (streams 0,1,2)
    std::map<int64_t, std::vector<Arrival>> inbox;

    LineStarSyncCanonical(Engine& eng, int block_idx_, const std::array<int, 5>& node_,
                          int key_)
        : block_idx(block_idx_), node(node_), key(key_) {
        for (int s = 0; s < 3; ++s)
            src_codecs.emplace_back(eng.field, *eng.coeffs, 1, 1, s, 0, eng.cfg.retention);
    }

    int stream_source(int s) const { return s == 0 ? node[0] : node[2 + s]; }

    void deliver_and_generate(int64_t t, Engine& eng) override {
        for (const auto& a : take_due(inbox, t)) {
            eng.on_recv(t, flat_node(a.receiver), a.wireless_edge, a.bytes);
            int codec_idx = a.receiver == 0 ? 0 : (a.receiver == 3 ? 1 : a.receiver == 4 ? 2 : -1);
            if (codec_idx < 0)
                continue;  // relays are schedule-driven here
            uint16_t sym = static_cast<uint16_t>((a.bytes[0] << 8) | a.bytes[1]);
            ScheduledStarSymbol sched = a.sender == 1
                                            ? linestar_sync_line_relay_schedule(a.send_slot)
                                            : linestar_sync_center_schedule(a.send_slot);
            std::array<int64_t, 3> ords;
            for (int s = 0; s < 3; ++s)
                ords[s] = sched.ts[s] < 0 ? -1 : sched.ts[s] / 2;
            auto decs = src_codecs[codec_idx].receive_resolved(0, ords, sched.kbit, sym);
            for (const auto& d : decs) {
                uint16_t expect = eng.payload_of(key, stream_source(d.stream), d.ordinal);
                if (d.payload != expect)
                    throw InternalError("sync line-star decoded a wrong symbol");
                eng.on_decode(t, block_idx, stream_source(d.stream), flat_node(a.receiver),
                              d.ordinal, 2 * d.ordinal, d.payload, a.wireless_edge);
            }
        }
        if (t % 2 == 0) {
            for (int s = 0; s < 3; ++s)
                src_codecs[s].push_own(t / 2, eng.payload_of(key, stream_source(s), t / 2));
            if (t <= eng.gen_until)
                ++eng.trace.per_block[block_idx].epochs;
        }
    }

    int flat_node(int pos) const { return node[pos]; }

    void emit(int64_t t, Engine& eng) override {
        MessageFn w = [&](int stream, int64_t ts) {
            return eng.payload_of(key, stream_source(stream), ts / 2);
        };
        auto symbol = [&](int pos) -> uint16_t {
            switch (pos) {
            case 0:
                return star_sync_source_symbol(eng.field, *eng.coeffs, 0, t, w);
            case 1:
                return linestar_sync_line_relay_symbol(eng.field, *eng.coeffs, t, w);
            case 2:
                return linestar_sync_center_symbol(eng.field, *eng.coeffs, t, w);
            default:
                return star_sync_source_symbol(eng.field, *eng.coeffs, pos - 2, t, w);
            }
        };
        auto nb_of = [&](int pos) {
            std::vector<ChainNeighbor> nb;
            auto link = [&](int a, int b) {
                nb.push_back({b, 0, wireless_edge_between(eng.g, node[a], node[b])});
            };
            if (pos == 0)
                link(0, 1);
            else if (pos == 1) {
                link(1, 0);
                link(1, 2);
            } else if (pos == 2) {
                link(2, 1);
                link(2, 3);
                link(2, 4);
            } else
                link(pos, 2);
            return nb;
        };
        int in_window = t <= (eng.gen_until / 2) * 2 + 1 ? 1 : 0;
        for (int pos = 0; pos < 5; ++pos) {
            uint16_t sym = symbol(pos);
            std::vector<uint8_t> bytes{static_cast<uint8_t>(sym >> 8),
                                       static_cast<uint8_t>(sym & 0xff)};
            broadcast(eng, block_idx, inbox, t, pos, nb_of(pos), bytes, node[pos], in_window);
        }
    }

    void finalize(Engine& eng) override {
        int64_t last_ord = eng.gen_until / 2;
        for (int s = 0; s < 3; ++s)
            for (int o = 0; o < 3; ++o)
                if (o != s && src_codecs[s].store(o).watermark() < last_ord)
                    throw InternalError("sync line-star failed to deliver every message");
    }

    int max_distance() const override { return 3; }
};

// ---------------------------------------------------------------------------
// Store-and-forward baselines. Messages travel as (stream, ordinal, payload)
// triplets; each relay rebroadcasts a message once. Generation periods keep
// the relay load at one transmission per slot.
struct RoutingRuntime : Runtime {
    int block_idx;
    struct NodeRt {
        int wireless;
        int own_stream;  // -1 relay
        std::vector<ChainNeighbor> neighbors;
        std::set<std::pair<int, int64_t>> seen;
        std::deque<std::tuple<int, int64_t, uint16_t>> queue;
    };
    std::vector<NodeRt> flat;
    std::vector<int> stream_source;     // wireless id per stream
    std::vector<int> stream_key;
    std::vector<int> source_pos;
    int gen_period;
    int L = 0;
    std::map<int64_t, std::vector<Arrival>> inbox;

    RoutingRuntime(Engine&, int block_idx_, int gen_period_)
        : block_idx(block_idx_), gen_period(gen_period_) {}

    void add_chain(Engine& eng, const std::vector<int>& nodes) {
        std::map<int, int> pos_of;
        for (auto& n : flat)
            pos_of[n.wireless] = static_cast<int>(&n - flat.data());
        auto add_node = [&](int w) {
            auto it = pos_of.find(w);
            if (it != pos_of.end())
                return it->second;
            int pos = static_cast<int>(flat.size());
            pos_of[w] = pos;
            flat.push_back({w, -1, {}, {}, {}});
            return pos;
        };
        for (size_t k = 0; k < nodes.size(); ++k) {
            int cur = add_node(nodes[k]);
            if (k > 0) {
                int prev = pos_of.at(nodes[k - 1]);
                int wedge = wireless_edge_between(eng.g, nodes[k - 1], nodes[k]);
                flat[prev].neighbors.push_back(
                    {cur, static_cast<int>(flat[cur].neighbors.size()), wedge});
                flat[cur].neighbors.push_back(
                    {prev, static_cast<int>(flat[prev].neighbors.size()) - 1, wedge});
            }
        }
        L = std::max(L, static_cast<int>(nodes.size()) - 1);
    }

    void add_stream(int source_wireless, int key) {
        int stream = static_cast<int>(stream_source.size());
        stream_source.push_back(source_wireless);
        stream_key.push_back(key);
        for (auto& n : flat)
            if (n.wireless == source_wireless && n.own_stream < 0)
                n.own_stream = stream >= 0 ? stream : -1;
        for (size_t i = 0; i < flat.size(); ++i)
            if (flat[i].wireless == source_wireless)
                source_pos.push_back(static_cast<int>(i));
    }

    void accept(Engine& eng, int64_t t, int pos, int stream, int64_t ord, uint16_t payload,
                int wedge) {
        auto& n = flat[pos];
        if (!n.seen.insert({stream, ord}).second)
            return;
        bool is_source = eng.g.wireless().is_source(n.wireless);
        if (is_source && stream_source[stream] != n.wireless)
            eng.on_decode(t, block_idx, stream_source[stream], n.wireless, ord,
                          gen_period * ord, payload, wedge);
        if (!is_source)
            n.queue.push_back({stream, ord, payload});
    }

    void deliver_and_generate(int64_t t, Engine& eng) override {
        for (const auto& a : take_due(inbox, t)) {
            eng.on_recv(t, flat[a.receiver].wireless, a.wireless_edge, a.bytes);
            int stream = a.bytes[0];
            int64_t ord = 0;
            for (int k = 0; k < 8; ++k)
                ord = (ord << 8) | a.bytes[1 + k];
            uint16_t payload = static_cast<uint16_t>((a.bytes[9] << 8) | a.bytes[10]);
            accept(eng, t, a.receiver, stream, ord, payload, a.wireless_edge);
        }
        if (t % gen_period == 0) {
            int64_t ord = t / gen_period;
            for (size_t s = 0; s < stream_source.size(); ++s) {
                uint16_t payload = eng.payload_of(stream_key[s], stream_source[s], ord);
                int pos = source_pos[s];
                flat[pos].seen.insert({static_cast<int>(s), ord});
                flat[pos].queue.push_back({static_cast<int>(s), ord, payload});
            }
            if (t <= eng.gen_until)
                ++eng.trace.per_block[block_idx].epochs;
        }
    }

    void emit(int64_t t, Engine& eng) override {
        for (size_t i = 0; i < flat.size(); ++i) {
            auto& n = flat[i];
            if (n.queue.empty())
                continue;
            auto [stream, ord, payload] = n.queue.front();
            n.queue.pop_front();
            std::vector<uint8_t> bytes;
            bytes.push_back(static_cast<uint8_t>(stream));
            for (int k = 7; k >= 0; --k)
                bytes.push_back(static_cast<uint8_t>((ord >> (8 * k)) & 0xff));
            bytes.push_back(static_cast<uint8_t>(payload >> 8));
            bytes.push_back(static_cast<uint8_t>(payload & 0xff));
            int in_window = ord <= eng.gen_until / gen_period ? 1 : 0;
            broadcast(eng, block_idx, inbox, t, static_cast<int>(i), n.neighbors, bytes,
                      n.wireless, in_window);
        }
    }

    void finalize(Engine& eng) override {
        int64_t last_ord = eng.gen_until / gen_period;
        for (size_t s = 0; s < stream_source.size(); ++s) {
            for (size_t i = 0; i < flat.size(); ++i) {
                const auto& n = flat[i];
                if (!eng.g.wireless().is_source(n.wireless) ||
                    n.wireless == stream_source[s])
                    continue;
                for (int64_t o = 0; o <= last_ord; ++o)
                    if (!n.seen.count({static_cast<int>(s), o}))
                        throw InternalError("routing baseline failed to deliver a message");
            }
        }
    }

    int max_distance() const override { return L; }
};

// ---------------------------------------------------------------------------

std::array<std::vector<int>, 3> arms_of_linestar(const WiredGraph& g, const Block& b) {
    // Arms run center -> source for the three sources i, j, l where paths
    // are i->j and i->l sharing the prefix i..center.
    auto nodes_ij = chain_nodes_of_path(g, b.paths[0]);
    auto nodes_il = chain_nodes_of_path(g, b.paths[1]);
    size_t cpos = 0;
    while (cpos < nodes_ij.size() && nodes_ij[cpos] != b.center)
        ++cpos;
    std::array<std::vector<int>, 3> arms;
    // Arm to i: prefix reversed.
    for (size_t k = 0; k <= cpos; ++k)
        arms[0].push_back(nodes_ij[cpos - k]);
    for (size_t k = cpos; k < nodes_ij.size(); ++k)
        arms[1].push_back(nodes_ij[k]);
    for (size_t k = cpos; k < nodes_il.size(); ++k)
        arms[2].push_back(nodes_il[k]);
    return arms;
}

}  // namespace

SimTrace run(const SimConfig& cfg) {
    if (!cfg.graph)
        throw ArgumentError("simulation requires a graph");
    if (cfg.mode == CodecMode::Sync &&
        (cfg.delay.kind != DelayModel::Fixed1 || cfg.delay.bound != 1))
        throw ArgumentError("sync mode requires the fixed unit delay model");
    if (cfg.delay.bound < 1)
        throw ArgumentError("delay bound must be >= 1");
    Engine eng(cfg);
    eng.trace.per_block.resize(cfg.blocks.size());
    std::vector<std::unique_ptr<Runtime>> runtimes;

    int wire_width = block_id_width(cfg.h_blocks);
    for (size_t b = 0; b < cfg.blocks.size(); ++b) {
        const Block& blk = cfg.blocks[b];
        int wire_id = static_cast<int>(b) & ((1 << wire_width) - 1);
        int relays = static_cast<int>(blk.relays.size());
        eng.trace.per_block[b].relay_count = relays;
        if (cfg.routing) {
            int period = blk.type == Block::Line || blk.type == Block::Ring ? 2 : 3;
            auto rt = std::make_unique<RoutingRuntime>(eng, static_cast<int>(b), period);
            if (blk.type == Block::LineStar) {
                auto arms = arms_of_linestar(eng.g, blk);
                for (int a = 0; a < 3; ++a)
                    rt->add_chain(eng, arms[a]);
                for (int a = 0; a < 3; ++a)
                    rt->add_stream(arms[a].empty() ? blk.center : arms[a].back(),
                                   static_cast<int>(b));
            } else {
                for (const auto& p : blk.paths)
                    rt->add_chain(eng, chain_nodes_of_path(eng.g, p));
                std::set<int> srcs;
                for (auto [x, y] : blk.ends) {
                    srcs.insert(x);
                    srcs.insert(y);
                }
                for (int s : srcs)
                    rt->add_stream(s, static_cast<int>(b));
            }
            runtimes.push_back(std::move(rt));
            continue;
        }
        switch (blk.type) {
        case Block::Line: {
            auto nodes = chain_nodes_of_path(eng.g, blk.paths[0]);
            std::array<int, 2> keys{static_cast<int>(b), static_cast<int>(b)};
            if (cfg.mode == CodecMode::Sync)
                runtimes.push_back(std::make_unique<ChainSync>(eng, static_cast<int>(b),
                                                               nodes, keys));
            else
                runtimes.push_back(std::make_unique<ChainAsync>(
                    eng, static_cast<int>(b), wire_id, cfg.h_blocks, nodes, keys));
            break;
        }
        case Block::Ring: {
            for (const auto& p : blk.paths) {
                auto nodes = chain_nodes_of_path(eng.g, p);
                std::array<int, 2> keys{static_cast<int>(b), static_cast<int>(b)};
                if (cfg.mode == CodecMode::Sync)
                    runtimes.push_back(std::make_unique<ChainSync>(eng, static_cast<int>(b),
                                                                   nodes, keys));
                else
                    runtimes.push_back(std::make_unique<ChainAsync>(
                        eng, static_cast<int>(b), wire_id, cfg.h_blocks, nodes, keys));
            }
            break;
        }
        case Block::LineStar: {
            auto arms = arms_of_linestar(eng.g, blk);
            if (cfg.mode == CodecMode::Sync) {
                // Canonical shapes get the scheduled codecs.
                std::array<size_t, 3> lens{arms[0].size(), arms[1].size(), arms[2].size()};
                if (lens == std::array<size_t, 3>{2, 2, 2}) {
                    std::array<int, 3> srcs{arms[0].back(), arms[1].back(), arms[2].back()};
                    runtimes.push_back(std::make_unique<StarSyncPure>(
                        eng, static_cast<int>(b), srcs, blk.center, static_cast<int>(b)));
                    break;
                }
                if (lens == std::array<size_t, 3>{3, 2, 2}) {
                    std::array<int, 5> node{arms[0][2], arms[0][1], blk.center,
                                            arms[1].back(), arms[2].back()};
                    runtimes.push_back(std::make_unique<LineStarSyncCanonical>(
                        eng, static_cast<int>(b), node, static_cast<int>(b)));
                    break;
                }
            }
            runtimes.push_back(std::make_unique<StarAsync>(eng, static_cast<int>(b), wire_id,
                                                           cfg.h_blocks, blk.center, arms,
                                                           static_cast<int>(b)));
            break;
        }
        }
    }

    int max_l = 1;
    for (const auto& rt : runtimes)
        max_l = std::max(max_l, rt->max_distance());
    int64_t drain = static_cast<int64_t>(max_l) * cfg.delay.bound + 2 * cfg.delay.bound + 12;
    eng.gen_until = cfg.horizon - 1 - drain;
    if (eng.gen_until < 0)
        throw ArgumentError("horizon too short for the deployment's drain tail");
    eng.trace.horizon = cfg.horizon;
    eng.trace.gen_until = eng.gen_until;

    for (int64_t t = 0; t < cfg.horizon; ++t) {
        for (auto& rt : runtimes)
            rt->deliver_and_generate(t, eng);
        for (auto& rt : runtimes)
            rt->emit(t, eng);
    }
    for (auto& rt : runtimes)
        rt->finalize(eng);

    std::ostringstream meta;
    meta << "mode=" << (cfg.routing ? "routing" : cfg.mode == CodecMode::Sync ? "sync" : "async")
         << " D=" << cfg.delay.bound << " delay="
         << (cfg.delay.kind == DelayModel::Fixed1
                 ? "fixed1"
                 : cfg.delay.kind == DelayModel::Uniform ? "uniform" : "adversarial")
         << " seed=" << cfg.delay.seed << " payload_seed=" << cfg.payload_seed
         << " rng=mt19937_64 payload_gen=splitmix64 field=GF(2^" << cfg.field_width
         << ") poly=0x" << std::hex << Field::primitive_poly(cfg.field_width) << std::dec
         << " blocks=" << cfg.blocks.size() << " h=" << cfg.h_blocks;
    eng.trace.metadata = meta.str();
    eng.trace.generated = 0;
    for (const auto& c : eng.trace.per_block)
        eng.trace.generated += c.epochs;
    return std::move(eng.trace);
}

std::string SimTrace::summary() const {
    std::ostringstream out;
    int64_t worst = 0;
    for (const auto& [k, v] : max_delay)
        worst = std::max(worst, v);
    out << "summary: relay_tx=" << relay_tx << ", src_tx=" << source_tx
        << ", max_delay=" << worst << ", rate=" << delivered;
    return out.str();
}

std::string SimTrace::dump() const {
    std::ostringstream out;
    out << "# " << metadata << "\n";
    for (const auto& e : events) {
        out << e.slot << "," << e.node << "," << e.edge << ","
            << (e.kind == TraceEvent::Send ? "send"
                                           : e.kind == TraceEvent::Recv ? "recv" : "decode")
            << "," << e.header_hex << "," << e.payload_hex << "\n";
    }
    out << summary() << "\n";
    return out.str();
}

std::string SimTrace::counters_csv() const {
    std::ostringstream out;
    out << "block,relay_count,relay_sends_window,source_sends_window,epochs\n";
    for (size_t b = 0; b < per_block.size(); ++b) {
        const auto& c = per_block[b];
        out << b << "," << c.relay_count << "," << c.relay_sends_window << ","
            << c.source_sends_window << "," << c.epochs << "\n";
    }
    return out.str();
}

RtReport verify_rt(const SimTrace& trace, int max_distance, int delay_bound, int c) {
    RtReport rep;
    int64_t bound = static_cast<int64_t>(max_distance) * delay_bound + c;
    for (size_t i = 0; i < trace.decodes.size(); ++i) {
        const auto& d = trace.decodes[i];
        int64_t slack = d.gen_slot + bound - d.decode_slot;
        auto key = std::make_pair(d.origin, d.dest);
        auto it = rep.worst_slack.find(key);
        if (it == rep.worst_slack.end() || slack < it->second)
            rep.worst_slack[key] = slack;
        if (slack < 0) {
            rep.pass = false;
            rep.violating_records.push_back(i);
        }
    }
    return rep;
}

std::string RtReport::to_string() const {
    std::ostringstream out;
    for (const auto& [k, v] : worst_slack)
        out << k.first << "->" << k.second << (v >= 0 ? " pass" : " FAIL")
            << " slack=" << v << "\n";
    return out.str();
}

TxCounts count_transmissions(const SimTrace& trace) {
    return {trace.relay_tx, trace.source_tx};
}

SimTrace run_routing_baseline(SimConfig cfg) {
    cfg.routing = true;
    return run(cfg);
}

std::vector<Block> deployment_for_session(const WiredGraph& g, SessionType session,
                                          const DecomposeOptions& opts) {
    std::vector<Block> blocks;
    if (g.sources().size() == 2) {
        int a = g.sources()[0], b = g.sources()[1];
        int k = min_cut(g, a, b);
        for (auto& p : edge_disjoint_paths(g, a, b, k)) {
            Block blk;
            blk.type = Block::Line;
            blk.paths = {p};
            blk.ends = {{a, b}};
            blk.wireless_edges = wireless_footprint(g, p);
            blk.relays = path_relays(g, p);
            blocks.push_back(std::move(blk));
        }
        return blocks;
    }
    switch (session) {
    case SessionType::Multicast: {
        auto d = decompose_multicast(g, opts);
        blocks = d.rings;
        blocks.insert(blocks.end(), d.linestars.begin(), d.linestars.end());
        break;
    }
    case SessionType::Unicast: {
        auto plan = unicast_corner(g, {g.sources()[0], g.sources()[1]});
        blocks = plan.blocks;
        break;
    }
    case SessionType::Combined: {
        auto corners = combined_corners(g);
        const auto& mixed = corners.back();
        blocks = mixed.decomposition.rings;
        blocks.insert(blocks.end(), mixed.decomposition.linestars.begin(),
                      mixed.decomposition.linestars.end());
        blocks.insert(blocks.end(), mixed.unicast.blocks.begin(),
                      mixed.unicast.blocks.end());
        break;
    }
    }
    return blocks;
}

int deployment_max_distance(const WiredGraph& g, const std::vector<Block>& blocks) {
    int L = 1;
    for (const auto& b : blocks) {
        if (b.type == Block::LineStar) {
            auto arms = arms_of_linestar(g, b);
            for (int x = 0; x < 3; ++x)
                for (int y = x + 1; y < 3; ++y)
                    L = std::max(L, static_cast<int>(arms[x].size() + arms[y].size()) - 2);
        } else {
            for (const auto& p : b.paths)
                L = std::max(L,
                             static_cast<int>(chain_nodes_of_path(g, p).size()) - 1);
        }
    }
    return L;
}

}  // namespace rtnc
