#include "rtnc/decompose.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace rtnc {

namespace {

EdgeMask effective_mask(const BinaryFlowProblem& p) {
    return p.alive.empty() ? full_mask(*p.graph) : p.alive;
}

std::vector<int> alive_ids(const WiredGraph& g, const EdgeMask& mask) {
    std::vector<int> ids;
    for (const auto& e : g.edges())
        if (mask[e.id])
            ids.push_back(e.id);
    return ids;
}

}  // namespace

int flow_in(const WiredGraph& g, const std::vector<char>& flow, int node) {
    int v = 0;
    for (int eid : g.in_edges(node))
        v += flow[eid];
    return v;
}

int flow_out(const WiredGraph& g, const std::vector<char>& flow, int node) {
    int v = 0;
    for (int eid : g.out_edges(node))
        v += flow[eid];
    return v;
}

bool flow_satisfies(const BinaryFlowProblem& p, const std::vector<char>& flow, int* violated) {
    const auto& g = *p.graph;
    for (size_t c = 0; c < p.constraints.size(); ++c) {
        const auto& nc = p.constraints[c];
        int in = flow_in(g, flow, nc.node);
        int out = flow_out(g, flow, nc.node);
        int got = nc.kind == NodeConstraint::InEquals    ? in
                  : nc.kind == NodeConstraint::OutEquals ? out
                                                         : in - out;
        if (got != nc.value) {
            if (violated)
                *violated = static_cast<int>(c);
            return false;
        }
    }
    if (p.relay_conservation) {
        for (size_t n = 0; n < g.nodes().size(); ++n) {
            if (g.node_is_source(static_cast<int>(n)))
                continue;
            if (flow_in(g, flow, static_cast<int>(n)) !=
                flow_out(g, flow, static_cast<int>(n))) {
                if (violated)
                    *violated = -2;
                return false;
            }
        }
    }
    if (violated)
        *violated = -1;
    return true;
}

int flow_objective(const BinaryFlowProblem& p, const std::vector<char>& flow) {
    if (p.objective == BinaryFlowProblem::MinTotal)
        return std::accumulate(flow.begin(), flow.end(), 0);
    return flow_in(*p.graph, flow, p.objective_node) -
           flow_out(*p.graph, flow, p.objective_node);
}

namespace {

// Branch and bound over binary edge variables in ascending id order, with
// per-node balance propagation.
struct BnB {
    const BinaryFlowProblem& p;
    const WiredGraph& g;
    std::vector<int> vars;
    std::vector<char> value;
    std::vector<int> cin, cout;  // committed balances
    std::vector<int> pin, pout;  // undecided potential
    int committed_total = 0;
    FlowSolution best;
    bool have_best = false;

    explicit BnB(const BinaryFlowProblem& prob)
        : p(prob), g(*prob.graph), value(g.edges().size(), 0), cin(g.nodes().size(), 0),
          cout(g.nodes().size(), 0), pin(g.nodes().size(), 0), pout(g.nodes().size(), 0) {
        EdgeMask mask = effective_mask(p);
        vars = alive_ids(g, mask);
        for (int eid : vars) {
            pin[g.edges()[eid].to]++;
            pout[g.edges()[eid].from]++;
        }
    }

    bool node_feasible(int n) const {
        for (const auto& nc : p.constraints) {
            if (nc.node != n)
                continue;
            switch (nc.kind) {
            case NodeConstraint::InEquals:
                if (cin[n] > nc.value || cin[n] + pin[n] < nc.value)
                    return false;
                break;
            case NodeConstraint::OutEquals:
                if (cout[n] > nc.value || cout[n] + pout[n] < nc.value)
                    return false;
                break;
            case NodeConstraint::NetInEquals:
                if (cin[n] - cout[n] - pout[n] > nc.value ||
                    cin[n] + pin[n] - cout[n] < nc.value)
                    return false;
                break;
            }
        }
        if (p.relay_conservation && !g.node_is_source(n)) {
            if (cin[n] - cout[n] > pout[n] || cout[n] - cin[n] > pin[n])
                return false;
        }
        return true;
    }

    bool objective_can_beat() const {
        if (!have_best)
            return true;
        if (p.objective == BinaryFlowProblem::MinTotal)
            return committed_total < best.objective;
        int n = p.objective_node;
        return cin[n] + pin[n] - cout[n] > best.objective;
    }

    void consider_leaf() {
        if (!flow_satisfies(p, value, nullptr))
            return;
        int obj = flow_objective(p, value);
        bool better = !have_best || (p.objective == BinaryFlowProblem::MinTotal
                                         ? obj < best.objective
                                         : obj > best.objective);
        if (better) {
            best.feasible = true;
            best.objective = obj;
            best.edge_flow = value;
            have_best = true;
        }
    }

    void search(size_t idx) {
        if (!objective_can_beat())
            return;
        if (idx == vars.size()) {
            consider_leaf();
            return;
        }
        int eid = vars[idx];
        const auto& e = g.edges()[eid];
        pin[e.to]--;
        pout[e.from]--;
        int first = p.objective == BinaryFlowProblem::MinTotal ? 0 : 1;
        for (int round = 0; round < 2; ++round) {
            int val = round == 0 ? first : 1 - first;
            value[eid] = static_cast<char>(val);
            if (val) {
                cin[e.to]++;
                cout[e.from]++;
                ++committed_total;
            }
            if (node_feasible(e.to) && node_feasible(e.from))
                search(idx + 1);
            if (val) {
                cin[e.to]--;
                cout[e.from]--;
                --committed_total;
            }
        }
        value[eid] = 0;
        pin[e.to]++;
        pout[e.from]++;
    }
};

// Deterministic augmenting-path construction for the standard problem
// shapes: satisfies each inflow demand by pushing unit paths from the
// unconstrained sources, then strips cycles and validates everything.
FlowSolution solve_heuristic(const BinaryFlowProblem& p) {
    const auto& g = *p.graph;
    EdgeMask mask = effective_mask(p);
    for (const auto& nc : p.constraints) {
        if (nc.value == 0) {
            if (nc.kind == NodeConstraint::InEquals)
                for (int eid : g.in_edges(nc.node))
                    mask[eid] = 0;
            if (nc.kind == NodeConstraint::OutEquals)
                for (int eid : g.out_edges(nc.node))
                    mask[eid] = 0;
        }
    }
    std::vector<int> push_sources;
    for (size_t n = 0; n < g.nodes().size(); ++n) {
        if (!g.node_is_source(static_cast<int>(n)))
            continue;
        bool demands_in = false;
        for (const auto& nc : p.constraints)
            if (nc.node == static_cast<int>(n) && nc.value > 0 &&
                (nc.kind == NodeConstraint::InEquals ||
                 nc.kind == NodeConstraint::NetInEquals))
                demands_in = true;
        if (!demands_in)
            push_sources.push_back(static_cast<int>(n));
    }
    FlowSolution r;
    r.exact = false;
    r.edge_flow.assign(g.edges().size(), 0);
    for (size_t c = 0; c < p.constraints.size(); ++c) {
        const auto& nc = p.constraints[c];
        if (nc.value <= 0 || nc.kind == NodeConstraint::OutEquals)
            continue;
        int have = flow_in(g, r.edge_flow, nc.node);
        if (nc.kind == NodeConstraint::NetInEquals)
            have -= flow_out(g, r.edge_flow, nc.node);
        int want = nc.value - have;
        if (want <= 0)
            continue;
        int sink[1] = {nc.node};
        int got = augment_flow(g, push_sources, sink, &mask, r.edge_flow, want);
        if (got != want) {
            r.feasible = false;
            r.violated_constraint = static_cast<int>(c);
            return r;
        }
    }
    cancel_flow_cycles(g, r.edge_flow);
    int violated = -1;
    if (!flow_satisfies(p, r.edge_flow, &violated)) {
        r.feasible = false;
        r.violated_constraint = violated;
        return r;
    }
    r.feasible = true;
    r.objective = flow_objective(p, r.edge_flow);
    return r;
}

}  // namespace

FlowSolution solve_binary_flow(const BinaryFlowProblem& p) {
    if (!p.graph)
        throw ArgumentError("binary flow problem without a graph");
    if (p.objective == BinaryFlowProblem::MaxNetInto && p.objective_node < 0)
        throw ArgumentError("objective node required");
    EdgeMask mask = effective_mask(p);
    if (static_cast<int>(alive_ids(*p.graph, mask).size()) > p.edge_budget)
        return solve_heuristic(p);
    BnB bnb(p);
    bnb.search(0);
    if (!bnb.have_best) {
        FlowSolution r;
        r.feasible = false;
        int violated = -1;
        flow_satisfies(p, std::vector<char>(p.graph->edges().size(), 0), &violated);
        r.violated_constraint = violated == -1 ? 0 : violated;
        return r;
    }
    bnb.best.exact = true;
    return bnb.best;
}

std::vector<char> remove_cyclic_flow(const WiredGraph& g, std::vector<char> flow,
                                     std::span<const int> protected_sources) {
    std::vector<int> avoid;
    for (int s : protected_sources)
        avoid.push_back(g.node_index(s, false));
    cancel_flow_cycles(g, flow, avoid);
    return flow;
}

// ---------------------------------------------------------------------------

namespace {

struct PairFlow {
    std::vector<char> flow;
    int ring_grade = 0;                   // net inflow at j after cyclic removal
    std::vector<std::vector<int>> paths;  // i -> j candidates
};

std::vector<int> source_node_indices(const WiredGraph& g) {
    std::vector<int> idx;
    for (int s : g.sources())
        idx.push_back(g.node_index(s, false));
    return idx;
}

// Mask away everything a flow's support touches, as bidirectional objects.
void remove_support_bidirectional(const WiredGraph& g, const std::vector<char>& flow,
                                  EdgeMask& mask) {
    for (const auto& e : g.edges()) {
        if (!flow[e.id])
            continue;
        if (e.broadcast) {
            mask[e.id] = 0;
        } else {
            for (int eid : g.wired_of_wireless(e.origin_edge))
                mask[eid] = 0;
        }
    }
}

// Deletable i -> j paths for the ring machinery: route the third source's
// protective flow, carve its footprint out, and take an i -> j max flow on
// the remainder. Several protective routings are tried (origin preference
// and adjacency direction) because a single deterministic routing can sit
// on the only relays the deletable paths need. Every candidate is gated by
// the Ring definition's cut preservation test.
PairFlow solve_pair_flow(const WiredGraph& g, const EdgeMask& working, int i, int j, int l) {
    int i_idx = g.node_index(i, false);
    int j_idx = g.node_index(j, false);
    int l_idx = g.node_index(l, false);
    EdgeMask mask = working;
    for (int eid : g.in_edges(i_idx))
        mask[eid] = 0;
    for (int eid : g.out_edges(l_idx))
        mask[eid] = 0;
    int from2[2] = {i, j};
    int to1[1] = {l};
    int cut_l = min_cut(g, from2, to1, &working);
    PairFlow pf;
    auto stops = source_node_indices(g);
    std::set<std::vector<int>> seen_footprints;
    int to[1] = {l_idx};
    int fr_j[1] = {j_idx};
    int fr_i[1] = {i_idx};
    auto harvest = [&](const std::vector<char>& pair_edge_flow) {
        auto flow_copy = pair_edge_flow;
        cancel_flow_cycles(g, flow_copy);
        auto cand = decompose_flow_paths(g, flow_copy, std::span<const int>(fr_i, 1), stops);
        int grade_here = 0;
        for (auto& path : cand) {
            if (g.edges()[path.back()].to != j_idx)
                continue;
            EdgeMask removed = working;
            remove_path_bidirectional(g, path, removed);
            if (min_cut(g, from2, to1, &removed) != cut_l)
                continue;
            ++grade_here;
            if (seen_footprints.insert(wireless_footprint(g, path)).second)
                pf.paths.push_back(std::move(path));
        }
        pf.ring_grade = std::max(pf.ring_grade, grade_here);
    };
    // Protection-carved flows first (their leading candidate also serves
    // the one-path-per-pair greedy), then plain flows gated purely by the
    // preservation test.
    for (int variant = 0; variant < 4; ++variant) {
        bool j_origin_first = variant % 2 == 0;
        bool reverse = variant >= 2;
        std::vector<char> flow(g.edges().size(), 0);
        int phase1 = augment_flow(g, j_origin_first ? fr_j : fr_i, to, &mask, flow, -1,
                                  reverse);
        phase1 += augment_flow(g, j_origin_first ? fr_i : fr_j, to, &mask, flow, -1, reverse);
        if (phase1 != cut_l)
            throw InternalError("pair flow: sink demand " + std::to_string(cut_l) +
                                " not met (got " + std::to_string(phase1) + ")");
        int avoid[2] = {i_idx, l_idx};
        cancel_flow_cycles(g, flow, avoid);
        if (variant == 0)
            pf.flow = flow;
        EdgeMask scratch = working;
        remove_support_bidirectional(g, flow, scratch);
        auto pair_flow = max_flow_units(g, std::span<const int>(&i, 1),
                                        std::span<const int>(&j, 1), &scratch);
        harvest(pair_flow.edge_flow);
    }
    for (bool reverse : {false, true}) {
        std::vector<char> flow(g.edges().size(), 0);
        augment_flow(g, fr_i, std::span<const int>(fr_j, 1), &working, flow, -1, reverse);
        harvest(flow);
    }
    return pf;
}

bool footprints_disjoint(const WiredGraph& g, const std::vector<int>& a_path,
                         const std::vector<int>& b_path) {
    auto ea = wireless_footprint(g, a_path);
    auto eb = wireless_footprint(g, b_path);
    std::vector<int> inter;
    std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(),
                          std::back_inserter(inter));
    if (!inter.empty())
        return false;
    auto ra = path_relays(g, a_path);
    auto rb = path_relays(g, b_path);
    std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(),
                          std::back_inserter(inter));
    return inter.empty();
}

// Ring validity on the current working graph: deleting any of the three
// paths keeps the remaining source's cut intact.
bool ring_valid(const WiredGraph& g, const EdgeMask& working,
                const std::array<const std::vector<int>*, 3>& paths,
                const std::array<std::array<int, 3>, 3>& ijl) {
    for (int k = 0; k < 3; ++k) {
        int i = ijl[k][0], j = ijl[k][1], l = ijl[k][2];
        int fr[2] = {i, j};
        int to[1] = {l};
        int before = min_cut(g, fr, to, &working);
        EdgeMask removed = working;
        remove_path_bidirectional(g, *paths[k], removed);
        if (min_cut(g, fr, to, &removed) != before)
            return false;
    }
    return true;
}

Block make_block(const WiredGraph& g, Block::Type type, std::vector<std::vector<int>> paths,
                 std::vector<std::pair<int, int>> ends, int center = -1) {
    Block b;
    b.type = type;
    b.paths = std::move(paths);
    b.ends = std::move(ends);
    b.center = center;
    std::set<int> wedges, relays;
    for (const auto& p : b.paths) {
        for (int e : wireless_footprint(g, p))
            wedges.insert(e);
        for (int r : path_relays(g, p))
            relays.insert(r);
    }
    b.wireless_edges.assign(wedges.begin(), wedges.end());
    b.relays.assign(relays.begin(), relays.end());
    return b;
}

void remove_block(const WiredGraph& g, const Block& b, EdgeMask& mask) {
    remove_wireless_edges(g, b.wireless_edges, b.relays, mask);
}

struct PairSpec {
    int i, j, l;
};

std::array<PairSpec, 3> pair_specs(const WiredGraph& g) {
    const auto& s = g.sources();
    return {{{s[0], s[1], s[2]}, {s[1], s[2], s[0]}, {s[0], s[2], s[1]}}};
}

// Assemble one ring by picking a deletable path per pair, re-solving each
// subsequent pair on the residual of the earlier picks, with backtracking.
// The Ring definition is the final gate, evaluated on the working graph.
struct RingAssembler {
    const WiredGraph& g;
    const EdgeMask& working;
    const DecomposeOptions& opts;
    std::array<PairSpec, 3> specs;
    std::array<std::vector<int>, 3> chosen;
    bool thorough = true;

    std::optional<Block> rec(int level, const EdgeMask& scratch) {
        if (level == 3) {
            std::array<const std::vector<int>*, 3> paths{&chosen[0], &chosen[1], &chosen[2]};
            std::array<std::array<int, 3>, 3> ijl;
            for (int k = 0; k < 3; ++k)
                ijl[k] = {specs[k].i, specs[k].j, specs[k].l};
            if (!ring_valid(g, working, paths, ijl))
                return std::nullopt;
            return make_block(g, Block::Ring, {chosen[0], chosen[1], chosen[2]},
                              {{specs[0].i, specs[0].j},
                               {specs[1].i, specs[1].j},
                               {specs[2].i, specs[2].j}});
        }
        auto pf = solve_pair_flow(g, scratch, specs[level].i, specs[level].j, specs[level].l);
        if (pf.ring_grade == 0)
            return std::nullopt;
        std::vector<size_t> order(pf.paths.size());
        std::iota(order.begin(), order.end(), 0);
        if (!thorough)
            order.resize(1);  // one deterministic path per pair, no retries
        if (opts.shuffle_seed) {
            std::mt19937_64 rng(opts.shuffle_seed + level);
            std::shuffle(order.begin(), order.end(), rng);
        }
        for (size_t idx : order) {
            chosen[level] = pf.paths[idx];
            EdgeMask next = scratch;
            remove_path_bidirectional(g, chosen[level], next);
            if (auto r = rec(level + 1, next))
                return r;
        }
        return std::nullopt;
    }
};

std::optional<Block> extract_ring(const WiredGraph& g, const EdgeMask& working,
                                  const DecomposeOptions& opts, bool thorough = true) {
    RingAssembler asmbl{g, working, opts, pair_specs(g), {}, thorough};
    return asmbl.rec(0, working);
}

// Exhaustive maximum-ring packing for small graphs.
struct RingSearch {
    const WiredGraph& g;
    size_t path_cap = 48;
    int best_count = 0;
    std::vector<Block> best_set;

    void dfs(const EdgeMask& mask, int cur, int target, std::vector<char>& used,
             std::vector<char>& visited, std::vector<int>& path,
             std::vector<std::vector<int>>& out) {
        if (out.size() >= path_cap)
            return;
        if (cur == target && !path.empty()) {
            out.push_back(path);
            return;
        }
        if (!path.empty() && g.node_is_source(cur))
            return;
        visited[cur] = 1;
        for (int eid : g.out_edges(cur)) {
            if (!mask[eid] || used[eid])
                continue;
            int to = g.edges()[eid].to;
            if (visited[to] && to != target)
                continue;
            used[eid] = 1;
            path.push_back(eid);
            dfs(mask, to, target, used, visited, path, out);
            path.pop_back();
            used[eid] = 0;
        }
        visited[cur] = 0;
    }

    std::vector<std::vector<int>> simple_paths(const EdgeMask& mask, int s, int t) {
        std::vector<std::vector<int>> out;
        std::vector<int> cur;
        std::vector<char> used(g.edges().size(), 0);
        std::vector<char> visited(g.nodes().size(), 0);
        dfs(mask, g.node_index(s, false), g.node_index(t, false), used, visited, cur, out);
        return out;
    }

    void search(const EdgeMask& mask, std::vector<Block>& acc) {
        if (static_cast<int>(acc.size()) > best_count) {
            best_count = static_cast<int>(acc.size());
            best_set = acc;
        }
        auto specs = pair_specs(g);
        std::array<std::vector<std::vector<int>>, 3> cand;
        for (int k = 0; k < 3; ++k) {
            cand[k] = simple_paths(mask, specs[k].i, specs[k].j);
            if (cand[k].empty())
                return;
        }
        for (const auto& p0 : cand[0]) {
            for (const auto& p1 : cand[1]) {
                if (!footprints_disjoint(g, p0, p1))
                    continue;
                for (const auto& p2 : cand[2]) {
                    if (!footprints_disjoint(g, p0, p2) || !footprints_disjoint(g, p1, p2))
                        continue;
                    std::array<const std::vector<int>*, 3> paths{&p0, &p1, &p2};
                    std::array<std::array<int, 3>, 3> ijl;
                    for (int k = 0; k < 3; ++k)
                        ijl[k] = {specs[k].i, specs[k].j, specs[k].l};
                    if (!ring_valid(g, mask, paths, ijl))
                        continue;
                    Block b = make_block(g, Block::Ring, {p0, p1, p2},
                                         {{specs[0].i, specs[0].j},
                                          {specs[1].i, specs[1].j},
                                          {specs[2].i, specs[2].j}});
                    EdgeMask next = mask;
                    remove_block(g, b, next);
                    acc.push_back(b);
                    search(next, acc);
                    acc.pop_back();
                }
            }
        }
    }
};

void restore_path(const WiredGraph& g, const std::vector<int>& path, EdgeMask& mask,
                  const EdgeMask& reference) {
    for (int we : wireless_footprint(g, path))
        for (int eid : g.wired_of_wireless(we))
            mask[eid] = reference[eid];
    for (int r : path_relays(g, path)) {
        int b = g.broadcast_edge_of(r);
        if (b >= 0)
            mask[b] = reference[b];
    }
}

std::vector<int> path_nodes_wireless(const WiredGraph& g, const std::vector<int>& path) {
    std::vector<int> nodes;
    nodes.push_back(g.nodes()[g.edges()[path.front()].from].base);
    for (int eid : path) {
        const auto& e = g.edges()[eid];
        if (!e.broadcast)
            nodes.push_back(g.nodes()[e.to].base);
    }
    return nodes;
}

std::vector<int> path_wireless_edge_seq(const WiredGraph& g, const std::vector<int>& path) {
    std::vector<int> seq;
    for (int eid : path)
        if (!g.edges()[eid].broadcast)
            seq.push_back(g.edges()[eid].origin_edge);
    return seq;
}

// A valid line-star splits into a shared prefix from the far source to the
// center plus edge- and relay-disjoint arms.
std::optional<Block> validate_linestar(const WiredGraph& g, const std::vector<int>& p_ij,
                                       const std::vector<int>& p_il, int i, int j, int l) {
    auto seq_ij = path_wireless_edge_seq(g, p_ij);
    auto seq_il = path_wireless_edge_seq(g, p_il);
    auto nodes_ij = path_nodes_wireless(g, p_ij);
    size_t common = 0;
    while (common < seq_ij.size() && common < seq_il.size() &&
           seq_ij[common] == seq_il[common])
        ++common;
    int center = nodes_ij[common];
    std::set<int> suffix_edges(seq_ij.begin() + common, seq_ij.end());
    for (size_t k = common; k < seq_il.size(); ++k)
        if (suffix_edges.count(seq_il[k]))
            return std::nullopt;
    auto relays_of_suffix = [&](const std::vector<int>& path, size_t skip_edges) {
        std::set<int> rel;
        auto nodes = path_nodes_wireless(g, path);
        for (size_t k = skip_edges + 1; k + 1 < nodes.size(); ++k)
            rel.insert(nodes[k]);
        return rel;
    };
    auto ra = relays_of_suffix(p_ij, common);
    auto rb = relays_of_suffix(p_il, common);
    for (int r : ra)
        if (rb.count(r))
            return std::nullopt;
    return make_block(g, Block::LineStar, {p_ij, p_il}, {{i, j}, {i, l}}, center);
}

std::string dump_for_diagnostics(const WiredGraph& g, const EdgeMask& mask) {
    std::ostringstream out;
    out << g.wireless().serialize();
    out << "alive:";
    for (size_t e = 0; e < mask.size(); ++e)
        if (mask[e])
            out << " " << e;
    return out.str();
}

}  // namespace

std::vector<Block> find_linestars_impl(const WiredGraph& g, EdgeMask& residual, int target,
                                       const DecomposeOptions& opts, bool must_finish);

std::pair<std::vector<Block>, EdgeMask> find_rings(const WiredGraph& g, EdgeMask working,
                                                   const DecomposeOptions& opts) {
    if (g.sources().size() != 3)
        throw ArgumentError("ring decomposition needs exactly three sources");
    std::vector<Block> rings;
    if (static_cast<int>(alive_ids(g, working).size()) <= opts.exhaustive_ring_edge_limit) {
        RingSearch rs{g, 48, 0, {}};
        std::vector<Block> acc;
        rs.search(working, acc);
        for (const auto& b : rs.best_set) {
            remove_block(g, b, working);
            rings.push_back(b);
        }
        return {rings, working};
    }
    while (true) {
        auto ring = extract_ring(g, working, opts, false);
        if (!ring)
            break;
        remove_block(g, *ring, working);
        rings.push_back(*ring);
    }
    return {rings, working};
}

std::vector<Block> find_linestars(const WiredGraph& g, EdgeMask& residual, int h, int num_rings,
                                  const DecomposeOptions& opts) {
    return find_linestars_impl(g, residual, h - 2 * num_rings, opts, true);
}

namespace {

// All assemblable line-stars at the current residual: for each source pair
// and orientation, candidate far-to-near paths come from one max-flow
// decomposition ranked by how little their deletion lowers the third cut,
// and the special second path is found after temporarily stripping the
// remaining third-to-far routes. Pairs with no ring-grade path left come
// first, then candidates by damage rank.
std::vector<Block> linestar_candidates(const WiredGraph& g, const EdgeMask& residual,
                                       const DecomposeOptions& opts, size_t cap) {
    std::vector<Block> found;
    auto specs = pair_specs(g);
    std::array<int, 3> grade;
    std::vector<int> order{0, 1, 2};
    for (int k = 0; k < 3; ++k)
        grade[k] = solve_pair_flow(g, residual, specs[k].i, specs[k].j, specs[k].l).ring_grade;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return grade[a] < grade[b]; });
    auto stops = source_node_indices(g);
    for (int k : order) {
        for (int orient = 0; orient < 2; ++orient) {
            if (found.size() >= cap)
                return found;
            int i = orient == 0 ? specs[k].i : specs[k].j;
            int j = orient == 0 ? specs[k].j : specs[k].i;
            int l = specs[k].l;
            int i_idx = g.node_index(i, false);
            auto r = max_flow_units(g, std::span<const int>(&i, 1),
                                    std::span<const int>(&j, 1), &residual);
            if (r.value == 0)
                continue;
            cancel_flow_cycles(g, r.edge_flow);
            auto all = decompose_flow_paths(g, r.edge_flow,
                                            std::span<const int>(&i_idx, 1), stops);
            // Keep only walks that reach j; flow routed through the third
            // source truncates at the stop set and must not pose as a path.
            std::vector<std::vector<int>> cand;
            for (auto& path : all)
                if (g.edges()[path.back()].to == g.node_index(j, false))
                    cand.push_back(std::move(path));
            int fr[2] = {i, j};
            int to[1] = {l};
            int cut_before = min_cut(g, fr, to, &residual);
            std::vector<std::pair<int, size_t>> ranked;
            for (size_t c = 0; c < cand.size(); ++c) {
                EdgeMask tmp = residual;
                remove_path_bidirectional(g, cand[c], tmp);
                ranked.push_back({cut_before - min_cut(g, fr, to, &tmp), c});
            }
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            if (opts.shuffle_seed) {
                std::mt19937_64 rng(opts.shuffle_seed + k * 2 + orient);
                std::shuffle(ranked.begin(), ranked.end(), rng);
            }
            for (const auto& [decrease, idx] : ranked) {
                if (found.size() >= cap)
                    break;
                const auto& p_ij = cand[idx];
                EdgeMask scaffold = residual;
                remove_path_bidirectional(g, p_ij, scaffold);
                while (true) {
                    auto lr = max_flow_units(g, std::span<const int>(&l, 1),
                                             std::span<const int>(&i, 1), &scaffold, 1);
                    if (lr.value == 0)
                        break;
                    int l_idx = g.node_index(l, false);
                    auto lp = decompose_flow_paths(g, lr.edge_flow,
                                                   std::span<const int>(&l_idx, 1), stops);
                    remove_path_bidirectional(g, lp.front(), scaffold);
                }
                restore_path(g, p_ij, scaffold, residual);
                auto fl = max_flow_units(g, std::span<const int>(&i, 1),
                                         std::span<const int>(&l, 1), &scaffold);
                if (fl.value == 0)
                    continue;
                cancel_flow_cycles(g, fl.edge_flow);
                auto lps = decompose_flow_paths(g, fl.edge_flow,
                                                std::span<const int>(&i_idx, 1), stops);
                int variants = 0;
                for (const auto& lp : lps) {
                    if (g.edges()[lp.back()].to != g.node_index(l, false))
                        continue;
                    auto block = validate_linestar(g, p_ij, lp, i, j, l);
                    if (block) {
                        found.push_back(std::move(*block));
                        if (++variants >= 4)
                            break;
                    }
                }
            }
        }
    }
    // Degenerate centers: two disjoint arms leaving one source cover the
    // case where the remaining structure only branches at a source itself
    // (the scaffold construction above always shares a prefix).
    for (int m : g.sources()) {
        if (found.size() >= cap)
            break;
        std::vector<int> others;
        for (int o : g.sources())
            if (o != m)
                others.push_back(o);
        int m_idx = g.node_index(m, false);
        std::vector<char> flow(g.edges().size(), 0);
        int fr[1] = {m_idx};
        int ta[1] = {g.node_index(others[0], false)};
        int tb[1] = {g.node_index(others[1], false)};
        if (augment_flow(g, fr, ta, &residual, flow, 1) != 1)
            continue;
        if (augment_flow(g, fr, tb, &residual, flow, 1) != 1)
            continue;
        cancel_flow_cycles(g, flow);
        auto stops = source_node_indices(g);
        auto walks = decompose_flow_paths(g, flow, std::span<const int>(fr, 1), stops);
        const std::vector<int>*pa = nullptr, *pb = nullptr;
        for (const auto& wpath : walks) {
            int end = g.edges()[wpath.back()].to;
            if (end == ta[0])
                pa = &wpath;
            else if (end == tb[0])
                pb = &wpath;
        }
        if (!pa || !pb)
            continue;
        auto block = validate_linestar(g, *pa, *pb, m, others[0], others[1]);
        if (block)
            found.push_back(std::move(*block));
    }
    // Prefer blocks that damage the remaining capacity least: the nominal
    // cost of a line-star is one unit of every source's cut, but removing
    // its relays can take out more.
    std::vector<int> before;
    for (int src : g.sources()) {
        std::vector<int> rest;
        for (int o : g.sources())
            if (o != src)
                rest.push_back(o);
        before.push_back(min_cut(g, std::span<const int>(&src, 1), rest, &residual));
    }
    std::vector<std::pair<int, size_t>> damage;
    for (size_t c = 0; c < found.size(); ++c) {
        EdgeMask tmp = residual;
        remove_block(g, found[c], tmp);
        int total = 0;
        int k2 = 0;
        for (int src : g.sources()) {
            std::vector<int> rest;
            for (int o : g.sources())
                if (o != src)
                    rest.push_back(o);
            total += before[k2++] - min_cut(g, std::span<const int>(&src, 1), rest, &tmp);
        }
        damage.push_back({total, c});
    }
    std::stable_sort(damage.begin(), damage.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Block> ordered;
    for (const auto& [d, c] : damage)
        ordered.push_back(std::move(found[c]));
    return ordered;
}

bool block_rec(const WiredGraph& g, EdgeMask& residual, int remaining,
               std::vector<Block>& out, int& budget, const DecomposeOptions& opts,
               bool allow_rings) {
    if (remaining <= 0)
        return true;
    if (--budget < 0)
        return false;
    // Necessary condition: every source must still have `remaining` cut
    // units toward the rest; prune dead branches before enumerating.
    for (int src : g.sources()) {
        std::vector<int> rest;
        for (int o : g.sources())
            if (o != src)
                rest.push_back(o);
        if (min_cut(g, std::span<const int>(&src, 1), rest, &residual) < remaining)
            return false;
    }
    auto cands = linestar_candidates(g, residual, opts, 24);
    // Rings close two units at once; they are tried after the line-stars so
    // the mix stays line-star-leaning unless capacity demands otherwise.
    if (allow_rings && remaining >= 2) {
        if (auto ring = extract_ring(g, residual, opts))
            cands.push_back(std::move(*ring));
    }
    for (auto& cand : cands) {
        int weight = cand.type == Block::Ring ? 2 : 1;
        EdgeMask next = residual;
        remove_block(g, cand, next);
        out.push_back(cand);
        EdgeMask saved = residual;
        residual = next;
        if (block_rec(g, residual, remaining - weight, out, budget, opts, allow_rings))
            return true;
        residual = saved;
        out.pop_back();
    }
    return false;
}

}  // namespace

std::vector<Block> find_linestars_impl(const WiredGraph& g, EdgeMask& residual, int target,
                                       const DecomposeOptions& opts, bool must_finish) {
    if (g.sources().size() != 3)
        throw ArgumentError("line-star decomposition needs exactly three sources");
    std::vector<Block> out;
    if (target <= 0)
        return out;
    int budget = 20000;
    if (block_rec(g, residual, target, out, budget, opts, false))
        return out;
    if (must_finish)
        throw InternalError("line-star bound unreachable\n" + dump_for_diagnostics(g, residual));
    out.clear();
    return out;
}

Decomposition decompose_multicast(const WiredGraph& g, const DecomposeOptions& opts) {
    Decomposition d;
    auto metrics = compute_metrics(g);
    d.h = metrics.h;
    d.residual = full_mask(g);
    if (d.h == 0)
        return d;
    // A pure line-star cover first: it matches the transmission profile the
    // sweeps report. Rings enter through the usual pipeline when line-stars
    // alone cannot close the capacity bound.
    {
        EdgeMask scratch = d.residual;
        std::vector<Block> found;
        int budget = 20000;
        if (block_rec(g, scratch, d.h, found, budget, opts, false)) {
            d.residual = std::move(scratch);
            d.linestars = std::move(found);
        }
    }
    if (d.linestars.empty() && d.h > 0) {
        auto [rings, after] = find_rings(g, d.residual, opts);
        d.rings = rings;
        d.residual = after;
        int target = d.h - 2 * static_cast<int>(d.rings.size());
        if (target > 0) {
            std::vector<Block> found;
            int budget = 20000;
            if (!block_rec(g, d.residual, target, found, budget, opts, true))
                throw InternalError("decomposition cannot reach the capacity bound\n" +
                                    dump_for_diagnostics(g, d.residual));
            for (auto& b : found) {
                if (b.type == Block::Ring)
                    d.rings.push_back(std::move(b));
                else
                    d.linestars.push_back(std::move(b));
            }
        }
    }
    int achieved = d.rate_half_units();
    if (achieved != d.h)
        throw InternalError("decomposition rate " + std::to_string(achieved) +
                            " does not meet h = " + std::to_string(d.h) + "\n" +
                            dump_for_diagnostics(g, d.residual));
    int min_deg = -1;
    for (int s : g.sources()) {
        int deg = g.wireless().degree(s);
        if (min_deg < 0 || deg < min_deg)
            min_deg = deg;
    }
    if (static_cast<int>(d.rings.size() + d.linestars.size()) > min_deg)
        throw InternalError("decomposition exceeds the source degree bound");
    return d;
}

int multicast_rate_half_units(const Decomposition& d) {
    int rate = d.rate_half_units();
    if (rate < d.h)
        throw InternalError("decomposition rate below the equal-rate capacity");
    return rate;
}

UnicastPlan unicast_corner(const WiredGraph& g, std::pair<int, int> anchor) {
    if (g.sources().size() != 3)
        throw ArgumentError("unicast corner points need exactly three sources");
    int i = anchor.first, j = anchor.second;
    if (!g.wireless().is_source(i) || !g.wireless().is_source(j) || i == j)
        throw ArgumentError("anchor must name two distinct sources");
    int l = -1;
    for (int s : g.sources())
        if (s != i && s != j)
            l = s;
    auto cut2 = [&](int a, int b1, int b2) {
        int one[1] = {a};
        int two[2] = {b1, b2};
        return min_cut(g, one, two);
    };
    int c_ij = min_cut(g, i, j);
    // Orient the anchor so that C_{i;j} = C_{i;j,l}.
    if (cut2(i, j, l) != c_ij) {
        std::swap(i, j);
        if (cut2(i, j, l) != c_ij)
            throw InternalError("cut identity violated: C_{i;j} != min one-vs-rest cut");
    }
    int c_j_il = cut2(j, i, l);
    int r_jl = std::max(0, c_j_il - c_ij);

    UnicastPlan plan;
    plan.anchor = {i, j};
    auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    plan.rate_units[key(i, j)] = c_ij;
    plan.rate_units[key(j, l)] = r_jl;
    plan.rate_units[key(i, l)] = 0;

    EdgeMask mask = full_mask(g);
    int i_idx = g.node_index(i, false);
    int j_idx = g.node_index(j, false);
    int l_idx = g.node_index(l, false);
    for (int eid : g.out_edges(i_idx))
        mask[eid] = 0;
    for (int eid : g.in_edges(j_idx))
        mask[eid] = 0;
    std::vector<char> flow(g.edges().size(), 0);
    int fr[1] = {j_idx};
    int toi[1] = {i_idx};
    if (augment_flow(g, fr, toi, &mask, flow, c_ij) != c_ij)
        throw InternalError("anchor family infeasible despite the cut value");
    int tol[1] = {l_idx};
    if (augment_flow(g, fr, tol, &mask, flow, r_jl) != r_jl)
        throw InternalError("secondary family infeasible despite the cut values");
    cancel_flow_cycles(g, flow);
    // No stop set: a family path may legally run through the third source.
    auto paths = decompose_flow_paths(g, flow, std::span<const int>(&j_idx, 1));
    std::vector<std::vector<int>> fam_ij, fam_jl;
    for (auto& p : paths) {
        int end = g.edges()[p.back()].to;
        if (end == i_idx)
            fam_ij.push_back(std::move(p));
        else if (end == l_idx)
            fam_jl.push_back(std::move(p));
        else
            throw InternalError("unicast path ends at an unexpected node");
    }
    if (static_cast<int>(fam_ij.size()) != c_ij || static_cast<int>(fam_jl.size()) != r_jl)
        throw InternalError("unicast family sizes disagree with the cut values");
    for (const auto& p : fam_ij)
        plan.blocks.push_back(make_block(g, Block::Line, {p}, {{j, i}}));
    for (const auto& p : fam_jl)
        plan.blocks.push_back(make_block(g, Block::Line, {p}, {{j, l}}));
    for (size_t a = 0; a < plan.blocks.size(); ++a)
        for (size_t b = a + 1; b < plan.blocks.size(); ++b)
            if (!footprints_disjoint(g, plan.blocks[a].paths[0], plan.blocks[b].paths[0]))
                throw InternalError("unicast families are not edge-disjoint");
    return plan;
}

std::vector<CombinedCorner> combined_corners(const WiredGraph& g) {
    if (g.sources().size() != 3)
        throw ArgumentError("combined corners need exactly three sources");
    std::vector<CombinedCorner> out;
    const auto& s = g.sources();
    std::array<std::pair<int, int>, 3> pairs{{{s[0], s[1]}, {s[1], s[2]}, {s[0], s[2]}}};
    for (auto pr : pairs) {
        CombinedCorner c;
        c.pure_unicast = true;
        c.unicast = unicast_corner(g, pr);
        out.push_back(std::move(c));
    }
    CombinedCorner mc;
    mc.pure_unicast = false;
    mc.decomposition = decompose_multicast(g);
    mc.multicast_half_units = mc.decomposition.rate_half_units();
    auto metrics = compute_metrics(g);
    int bottleneck = -1;
    for (int src : g.sources())
        if (bottleneck < 0 || metrics.one_vs_rest.at(src) < metrics.one_vs_rest.at(bottleneck))
            bottleneck = src;
    std::vector<int> others;
    for (int src : g.sources())
        if (src != bottleneck)
            others.push_back(src);
    int extra = min_cut(g, others[0], others[1], &mc.decomposition.residual);
    mc.unicast.anchor = {others[0], others[1]};
    auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    mc.unicast.rate_units[key(others[0], others[1])] = extra;
    mc.unicast.rate_units[key(bottleneck, others[0])] = 0;
    mc.unicast.rate_units[key(bottleneck, others[1])] = 0;
    if (extra > 0) {
        auto paths = edge_disjoint_paths(g, others[0], others[1], extra,
                                         &mc.decomposition.residual);
        for (const auto& p : paths)
            mc.unicast.blocks.push_back(
                make_block(g, Block::Line, {p}, {{others[0], others[1]}}));
    }
    out.push_back(std::move(mc));
    return out;
}

std::string dump_blocks(const WiredGraph& g, const std::vector<Block>& blocks) {
    std::ostringstream out;
    for (size_t id = 0; id < blocks.size(); ++id) {
        const auto& b = blocks[id];
        out << "block " << id << " type "
            << (b.type == Block::Ring        ? "ring"
                : b.type == Block::LineStar ? "linestar"
                                             : "line")
            << " edges ";
        for (size_t k = 0; k < b.wireless_edges.size(); ++k) {
            const auto& we = g.wireless().edges()[b.wireless_edges[k]];
            out << (k ? "," : "") << we.u << "-" << we.v;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace rtnc
