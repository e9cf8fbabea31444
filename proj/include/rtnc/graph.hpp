#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtnc/errors.hpp"

namespace rtnc {

// Undirected link of unit capacity C. Parallel links between the same pair
// are distinct edges with their own ids.
struct WirelessEdge {
    int id;
    int u;
    int v;
};

class WirelessGraph {
public:
    WirelessGraph(int num_nodes, std::vector<int> sources, int capacity);

    void add_edge(int u, int v, int multiplicity = 1);

    // Text format, one record per line:
    //   nodes M sources s1,s2[,s3] capacity C
    //   edge u v [multiplicity]
    // '#' starts a comment.
    static WirelessGraph parse(const std::string& text);
    static WirelessGraph load(const std::string& path);
    std::string serialize() const;

    int num_nodes() const { return num_nodes_; }
    int capacity() const { return capacity_; }
    const std::vector<int>& sources() const { return sources_; }
    const std::vector<WirelessEdge>& edges() const { return edges_; }
    bool is_source(int node) const;
    bool is_node(int node) const { return node >= 1 && node <= num_nodes_; }
    int degree(int node) const;

    // Throws ArgumentError on violated invariants; coding requires 2 or 3
    // sources, plain graph queries allow more.
    void validate(bool for_coding = true) const;

private:
    int num_nodes_;
    std::vector<int> sources_;
    int capacity_;
    std::vector<WirelessEdge> edges_;
};

struct WiredNode {
    int base;     // wireless node id
    bool primed;  // relay output half
};

struct WiredEdge {
    int id;
    int from;         // wired node index
    int to;           // wired node index
    int origin_edge;  // wireless edge id, or -1 for a broadcast (i,i') edge
    bool broadcast;
};

// Directed graph after relay splitting. All edges carry one capacity unit
// (capacities are integer multiples of C everywhere).
class WiredGraph {
public:
    const std::vector<WiredNode>& nodes() const { return nodes_; }
    const std::vector<WiredEdge>& edges() const { return edges_; }
    const std::vector<int>& sources() const { return sources_; }  // wireless ids
    int capacity() const { return capacity_; }

    int node_index(int base, bool primed) const;  // -1 when absent
    int source_index(int s) const { return node_index(s, false); }
    std::string node_name(int index) const;
    const std::vector<int>& out_edges(int node) const { return out_[node]; }
    const std::vector<int>& in_edges(int node) const { return in_[node]; }
    bool node_is_source(int index) const;

    // Both directed counterparts of a wireless edge, plus broadcast edges of
    // the given relay.
    std::vector<int> wired_of_wireless(int wireless_edge_id) const;
    int broadcast_edge_of(int relay) const;  // -1 when not a relay

    const WirelessGraph& wireless() const { return wireless_; }

    std::string dump() const;

private:
    friend WiredGraph split_relays(const WirelessGraph&);
    WirelessGraph wireless_{0, {}, 1};
    std::vector<WiredNode> nodes_;
    std::vector<WiredEdge> edges_;
    std::vector<int> sources_;
    int capacity_ = 1;
    std::vector<std::vector<int>> out_, in_;
    std::map<std::pair<int, bool>, int> index_;
    std::map<int, std::vector<int>> by_origin_;
    std::map<int, int> broadcast_;

    int add_node(int base, bool primed);
    void add_wired_edge(int from, int to, int origin, bool broadcast);
};

WiredGraph split_relays(const WirelessGraph& g);

// Edge-alive mask over wired edge ids; empty mask means "all alive".
using EdgeMask = std::vector<char>;

EdgeMask full_mask(const WiredGraph& g);

// Minimum cut between two disjoint nonempty sets of sources (wireless ids),
// in units of C. Integer max-flow with deterministic (ascending edge id)
// augmentation.
int min_cut(const WiredGraph& g, std::span<const int> from, std::span<const int> to,
            const EdgeMask* mask = nullptr);
int min_cut(const WiredGraph& g, int from, int to, const EdgeMask* mask = nullptr);

// Unit-capacity flow primitives shared with the decomposition algorithms.
struct FlowResult {
    int value = 0;
    std::vector<char> edge_flow;  // one unit per wired edge id
};

// Augment `flow` between wired node index sets until exhausted (max_units < 0)
// or the budget is reached. Returns the number of units pushed. The reverse
// flag explores adjacency in descending edge id, yielding an alternative
// deterministic routing.
int augment_flow(const WiredGraph& g, std::span<const int> from_nodes,
                 std::span<const int> to_nodes, const EdgeMask* mask, std::vector<char>& flow,
                 int max_units, bool reverse_order = false);

// Max flow between source sets given by wireless ids.
FlowResult max_flow_units(const WiredGraph& g, std::span<const int> from,
                          std::span<const int> to, const EdgeMask* mask = nullptr,
                          int cap_limit = -1);

// Cancel directed cycles in the flow support that avoid the given wired node
// indices. Node balances are preserved.
void cancel_flow_cycles(const WiredGraph& g, std::vector<char>& flow,
                        std::span<const int> avoid_nodes = {});

// Consume an acyclic flow into paths starting at the given wired node indices
// (lowest edge id first). A walk also terminates on reaching any stop node.
std::vector<std::vector<int>> decompose_flow_paths(const WiredGraph& g, std::vector<char> flow,
                                                   std::span<const int> from_nodes,
                                                   std::span<const int> stop_nodes = {});

// k pairwise edge-disjoint directed paths (lists of wired edge ids) from
// source s to source t, by flow decomposition of an integral max-flow.
// Throws InfeasibleError when k exceeds the min cut.
std::vector<std::vector<int>> edge_disjoint_paths(const WiredGraph& g, int s, int t, int k,
                                                  const EdgeMask* mask = nullptr);

// Hop distance between two sources; broadcast (i,i') edges traverse free.
// -1 when disconnected.
int hop_distance(const WiredGraph& g, int s, int t, const EdgeMask* mask = nullptr);

struct GraphMetrics {
    std::map<std::pair<int, int>, int> pair_cut;      // {i,j} -> C_{i;j}/C
    std::map<int, int> one_vs_rest;                   // i -> C_{i;S\i}/C
    std::map<int, int> two_vs_one;                    // l -> C_{i,j;l}/C
    int h = 0;                                        // min one_vs_rest
    int max_pair_distance = 0;                        // max shortest-path hops
};

GraphMetrics compute_metrics(const WiredGraph& g);

// Helpers used by the decomposition algorithms and tests.

// Wireless edge ids traversed by a wired path (broadcast edges excluded).
std::vector<int> wireless_footprint(const WiredGraph& g, std::span<const int> path);

// Interior relay ids of a wired path.
std::vector<int> path_relays(const WiredGraph& g, std::span<const int> path);

// Remove a path as a bidirectional object: both directions of every wireless
// edge on it plus the broadcast edges of its interior relays.
void remove_path_bidirectional(const WiredGraph& g, std::span<const int> path, EdgeMask& mask);

// Remove a set of wireless edges bidirectionally, plus broadcast edges of the
// listed relays.
void remove_wireless_edges(const WiredGraph& g, std::span<const int> wireless_edges,
                           std::span<const int> relays, EdgeMask& mask);

}  // namespace rtnc
