#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rtnc/codec.hpp"
#include "rtnc/decompose.hpp"
#include "rtnc/graph.hpp"

namespace rtnc {

struct DelayModel {
    enum Kind { Fixed1, Uniform, Adversarial } kind = Fixed1;
    int bound = 1;  // D
    uint64_t seed = 0;
    std::vector<int> list;  // adversarial per-draw delays; exhausted draws are 1
    bool per_edge_fifo = false;
};

enum class CodecMode { Sync, Async };
enum class SessionType { Multicast, Unicast, Combined };

struct SimConfig {
    const WiredGraph* graph = nullptr;
    std::vector<Block> blocks;  // deployment (one runtime per block)
    CodecMode mode = CodecMode::Sync;
    SessionType session = SessionType::Multicast;
    int64_t horizon = 100;
    DelayModel delay;
    int field_width = 8;
    uint64_t payload_seed = 1;
    int64_t retention = -1;  // message store retention; -1 unbounded
    int h_blocks = 1;        // block id width source for the wire format
    bool record_events = true;
    bool routing = false;  // store-and-forward baseline instead of coding
};

struct TraceEvent {
    int64_t slot;
    int node;
    int edge;  // wireless edge id for recv/decode; -1 for broadcast sends
    enum Kind { Send, Recv, Decode } kind;
    std::string header_hex;
    std::string payload_hex;
};

struct DecodeRecord {
    int block;
    int origin;  // wireless source id
    int dest;
    int64_t ordinal;
    int64_t gen_slot;
    int64_t decode_slot;
};

struct BlockCounters {
    int64_t relay_sends_window = 0;   // sends at slots <= gen_until
    int64_t source_sends_window = 0;
    int64_t epochs = 0;  // message generations inside the window
    int relay_count = 0;
};

struct SimTrace {
    std::vector<TraceEvent> events;
    std::vector<DecodeRecord> decodes;
    std::vector<BlockCounters> per_block;
    int64_t horizon = 0;
    int64_t gen_until = 0;
    int64_t relay_tx = 0;
    int64_t source_tx = 0;
    int64_t generated = 0;
    int64_t delivered = 0;
    std::map<std::pair<int, int>, int64_t> max_delay;  // (origin, dest)
    std::string metadata;

    std::string dump() const;     // event lines plus the summary record
    std::string summary() const;  // "summary: relay_tx=..., ..."
    std::string counters_csv() const;
};

SimTrace run(const SimConfig& cfg);

struct RtReport {
    bool pass = true;
    std::map<std::pair<int, int>, int64_t> worst_slack;
    std::vector<size_t> violating_records;
    std::string to_string() const;
};

// Checks every decode against the bound L*D + t + c.
RtReport verify_rt(const SimTrace& trace, int max_distance, int delay_bound, int c);

struct TxCounts {
    int64_t relay_tx = 0;
    int64_t source_tx = 0;
};

TxCounts count_transmissions(const SimTrace& trace);

// Store-and-forward baseline over the same deployment.
SimTrace run_routing_baseline(SimConfig cfg);

// Deployment builders.
std::vector<Block> deployment_for_session(const WiredGraph& g, SessionType session,
                                          const DecomposeOptions& opts = {});

// Largest codec distance (hops) across blocks; drives drain margins and the
// RT bounds of the deployment.
int deployment_max_distance(const WiredGraph& g, const std::vector<Block>& blocks);

}  // namespace rtnc
