#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rtnc/graph.hpp"

namespace rtnc {

// ---------------------------------------------------------------------------
// Binary edge-flow problems with per-node balance constraints.

struct NodeConstraint {
    enum Kind { InEquals, OutEquals, NetInEquals };
    int node;  // wired node index
    Kind kind;
    int value;
};

struct BinaryFlowProblem {
    const WiredGraph* graph = nullptr;
    EdgeMask alive;  // empty = all edges
    std::vector<NodeConstraint> constraints;
    bool relay_conservation = true;
    enum Objective { MaxNetInto, MinTotal } objective = MaxNetInto;
    int objective_node = -1;
    int edge_budget = 64;  // branch-and-bound size limit
};

struct FlowSolution {
    bool feasible = false;
    bool exact = true;  // false when the over-budget heuristic produced it
    int objective = 0;
    std::vector<char> edge_flow;
    int violated_constraint = -1;
};

int flow_in(const WiredGraph& g, const std::vector<char>& flow, int node);
int flow_out(const WiredGraph& g, const std::vector<char>& flow, int node);

// True when `flow` satisfies all constraints; otherwise sets *violated to the
// index of the first broken one (relay conservation reports -2).
bool flow_satisfies(const BinaryFlowProblem& p, const std::vector<char>& flow, int* violated);

int flow_objective(const BinaryFlowProblem& p, const std::vector<char>& flow);

// Exact branch-and-bound up to the edge budget; above it, a deterministic
// augmenting-path heuristic whose output is validated against every hard
// constraint (solutions are flagged exact=false).
FlowSolution solve_binary_flow(const BinaryFlowProblem& p);

// Cancel cyclic flow avoiding the protected sources (wireless ids).
std::vector<char> remove_cyclic_flow(const WiredGraph& g, std::vector<char> flow,
                                     std::span<const int> protected_sources);

// ---------------------------------------------------------------------------
// Coding building blocks.

struct Block {
    enum Type { Ring, LineStar, Line } type;
    // Ring: paths[k] joins pair_ends[k]. LineStar: paths[k] joins ends[k]
    // through the shared center. Line: a single path.
    std::vector<std::vector<int>> paths;  // wired edge id sequences
    std::vector<std::pair<int, int>> ends;
    std::vector<int> wireless_edges;
    std::vector<int> relays;
    int center = -1;  // line-star branch node (may be a source)
};

struct DecomposeOptions {
    // Exhaustive ring maximization kicks in at or below this many wired
    // edges; the greedy loop with the capacity-bound assertion runs
    // otherwise.
    int exhaustive_ring_edge_limit = 24;
    uint64_t shuffle_seed = 0;  // 0: deterministic lowest-id tie-breaks
};

struct Decomposition {
    std::vector<Block> rings;
    std::vector<Block> linestars;
    int h = 0;
    EdgeMask residual;
    bool exact = true;
    int rate_half_units() const {
        return 2 * static_cast<int>(rings.size()) + static_cast<int>(linestars.size());
    }
};

// Ring extraction: repeatedly solve the per-pair flow problems, subtract
// cyclic flow, and assemble one validated ring per round.
std::pair<std::vector<Block>, EdgeMask> find_rings(const WiredGraph& g, EdgeMask working,
                                                   const DecomposeOptions& opts = {});

// Line-star extraction on the post-ring residual; runs until the capacity
// bound |Q| >= h - 2|R| is met. Throws InternalError with a graph dump when the
// bound cannot be reached.
std::vector<Block> find_linestars(const WiredGraph& g, EdgeMask& residual, int h, int num_rings,
                                  const DecomposeOptions& opts = {});

// Full multicast pipeline; asserts the achieved rate meets h and the
// block count respects the source degree bound.
Decomposition decompose_multicast(const WiredGraph& g, const DecomposeOptions& opts = {});

// Achieved rate in units of C/2; asserts the bound h <= 2|R|+|Q| <= h.
int multicast_rate_half_units(const Decomposition& d);

// ---------------------------------------------------------------------------
// Multiple unicast corner points.

struct UnicastPlan {
    std::pair<int, int> anchor;  // normalized (i, j): C_{i;j} = C_{i;j,l}
    std::map<std::pair<int, int>, int> rate_units;  // ordered pairs, units of C
    std::vector<Block> blocks;                      // line blocks, anchor family first
};

UnicastPlan unicast_corner(const WiredGraph& g, std::pair<int, int> anchor);

struct CombinedCorner {
    bool pure_unicast = false;
    int multicast_half_units = 0;
    Decomposition decomposition;  // empty for pure unicast corners
    UnicastPlan unicast;          // pure plan, or the residual paths
};

std::vector<CombinedCorner> combined_corners(const WiredGraph& g);

// One line per block: "block <id> type{ring|linestar|line} edges u-v,...".
std::string dump_blocks(const WiredGraph& g, const std::vector<Block>& blocks);

}  // namespace rtnc
