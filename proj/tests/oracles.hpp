#pragma once

// Independent brute-force oracles used by the test suites. Everything here is
// deliberately naive and kept separate from the library implementation paths
// it checks.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <vector>

#include "rtnc/graph.hpp"

namespace oracle {

// Polynomial multiplication in GF(2^w) by long division against poly.
inline uint16_t gf_mul(uint16_t x, uint16_t y, uint32_t poly, int w) {
    // Carryless product.
    uint32_t prod = 0;
    for (int i = 0; i < 16; ++i)
        if ((y >> i) & 1u)
            prod ^= static_cast<uint32_t>(x) << i;
    // Reduce by repeated subtraction of shifted poly.
    for (int bit = 31; bit >= w; --bit)
        if ((prod >> bit) & 1u)
            prod ^= poly << (bit - w);
    return static_cast<uint16_t>(prod);
}

// Reachability from from-set to to-set using only alive edges not in `removed`.
inline bool reachable(const rtnc::WiredGraph& g, const std::vector<int>& from_nodes,
                      const std::vector<int>& to_nodes, const std::vector<char>& alive) {
    std::vector<char> seen(g.nodes().size(), 0);
    std::deque<int> q;
    for (int v : from_nodes) {
        seen[v] = 1;
        q.push_back(v);
    }
    std::set<int> targets(to_nodes.begin(), to_nodes.end());
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        if (targets.count(u))
            return true;
        for (int eid : g.out_edges(u)) {
            if (!alive[eid])
                continue;
            int v = g.edges()[eid].to;
            if (!seen[v]) {
                seen[v] = 1;
                q.push_back(v);
            }
        }
    }
    for (int t : to_nodes)
        if (seen[t])
            return true;
    return false;
}

// Brute-force min cut: enumerate all subsets of alive edges, find the smallest
// one whose removal disconnects the from-set from the to-set.
inline int min_cut_bruteforce(const rtnc::WiredGraph& g, const std::vector<int>& from,
                              const std::vector<int>& to,
                              const rtnc::EdgeMask* mask = nullptr) {
    std::vector<int> alive_ids;
    for (const auto& e : g.edges())
        if (!mask || (*mask)[e.id])
            alive_ids.push_back(e.id);
    const int m = static_cast<int>(alive_ids.size());
    if (m > 22)
        throw std::runtime_error("brute-force cut oracle limited to 22 edges");
    std::vector<int> from_nodes, to_nodes;
    for (int v : from)
        from_nodes.push_back(g.node_index(v, false));
    for (int v : to)
        to_nodes.push_back(g.node_index(v, false));
    int best = m + 1;
    for (uint32_t sub = 0; sub < (1u << m); ++sub) {
        int size = __builtin_popcount(sub);
        if (size >= best)
            continue;
        std::vector<char> alive(g.edges().size(), 0);
        for (int i = 0; i < m; ++i)
            alive[alive_ids[i]] = !((sub >> i) & 1u);
        if (!reachable(g, from_nodes, to_nodes, alive))
            best = size;
    }
    return best == m + 1 ? 0 : best;
}

// All simple directed paths between two wired node indices (bounded count).
inline void all_paths_rec(const rtnc::WiredGraph& g, int cur, int target,
                          const std::vector<char>& alive, std::vector<char>& used_edge,
                          std::vector<int>& cur_path, std::vector<std::vector<int>>& out,
                          size_t limit) {
    if (out.size() >= limit)
        return;
    if (cur == target) {
        out.push_back(cur_path);
        return;
    }
    for (int eid : g.out_edges(cur)) {
        if (!alive[eid] || used_edge[eid])
            continue;
        used_edge[eid] = 1;
        cur_path.push_back(eid);
        all_paths_rec(g, g.edges()[eid].to, target, alive, used_edge, cur_path, out, limit);
        cur_path.pop_back();
        used_edge[eid] = 0;
    }
}

inline std::vector<std::vector<int>> all_simple_paths(const rtnc::WiredGraph& g, int s, int t,
                                                      const rtnc::EdgeMask* mask = nullptr,
                                                      size_t limit = 4096) {
    std::vector<char> alive(g.edges().size(), 1);
    if (mask)
        for (size_t i = 0; i < alive.size(); ++i)
            alive[i] = (*mask)[i];
    std::vector<char> used(g.edges().size(), 0);
    std::vector<int> cur;
    std::vector<std::vector<int>> out;
    all_paths_rec(g, g.node_index(s, false), g.node_index(t, false), alive, used, cur, out, limit);
    return out;
}

// Exhaustive maximum edge-disjoint path packing between two sources.
inline int max_disjoint_paths_rec(const rtnc::WiredGraph& g,
                                  const std::vector<std::vector<int>>& paths, size_t idx,
                                  std::vector<char>& used_edge) {
    if (idx == paths.size())
        return 0;
    // Skip this path.
    int best = max_disjoint_paths_rec(g, paths, idx + 1, used_edge);
    // Or take it when edge-free.
    bool free = true;
    for (int eid : paths[idx])
        if (used_edge[eid]) {
            free = false;
            break;
        }
    if (free) {
        for (int eid : paths[idx])
            used_edge[eid] = 1;
        best = std::max(best, 1 + max_disjoint_paths_rec(g, paths, idx + 1, used_edge));
        for (int eid : paths[idx])
            used_edge[eid] = 0;
    }
    return best;
}

inline int max_disjoint_paths_bruteforce(const rtnc::WiredGraph& g, int s, int t,
                                         const rtnc::EdgeMask* mask = nullptr) {
    auto paths = all_simple_paths(g, s, t, mask);
    std::vector<char> used(g.edges().size(), 0);
    return max_disjoint_paths_rec(g, paths, 0, used);
}

}  // namespace oracle

#include "rtnc/decompose.hpp"

namespace oracle {

// Enumerate every binary edge flow and keep the best feasible one.
inline rtnc::FlowSolution solve_binary_flow_exhaustive(const rtnc::BinaryFlowProblem& p) {
    const auto& g = *p.graph;
    std::vector<int> ids;
    for (const auto& e : g.edges())
        if (p.alive.empty() || p.alive[e.id])
            ids.push_back(e.id);
    if (ids.size() > 20)
        throw std::runtime_error("exhaustive flow oracle limited to 20 edges");
    rtnc::FlowSolution best;
    for (uint64_t sub = 0; sub < (uint64_t{1} << ids.size()); ++sub) {
        std::vector<char> flow(g.edges().size(), 0);
        for (size_t i = 0; i < ids.size(); ++i)
            flow[ids[i]] = (sub >> i) & 1u;
        if (!rtnc::flow_satisfies(p, flow, nullptr))
            continue;
        int obj = rtnc::flow_objective(p, flow);
        bool better = !best.feasible ||
                      (p.objective == rtnc::BinaryFlowProblem::MinTotal ? obj < best.objective
                                                                        : obj > best.objective);
        if (better) {
            best.feasible = true;
            best.objective = obj;
            best.edge_flow = flow;
        }
    }
    return best;
}

}  // namespace oracle
