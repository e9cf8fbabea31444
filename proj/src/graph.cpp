#include "rtnc/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace rtnc {

WirelessGraph::WirelessGraph(int num_nodes, std::vector<int> sources, int capacity)
    : num_nodes_(num_nodes), sources_(std::move(sources)), capacity_(capacity) {}

void WirelessGraph::add_edge(int u, int v, int multiplicity) {
    if (!is_node(u) || !is_node(v))
        throw ArgumentError("edge endpoint outside declared nodes");
    if (u == v)
        throw ArgumentError("self-loops are not allowed");
    if (multiplicity < 1)
        throw ArgumentError("edge multiplicity must be >= 1");
    for (int m = 0; m < multiplicity; ++m)
        edges_.push_back({static_cast<int>(edges_.size()), u, v});
}

bool WirelessGraph::is_source(int node) const {
    return std::find(sources_.begin(), sources_.end(), node) != sources_.end();
}

int WirelessGraph::degree(int node) const {
    int d = 0;
    for (const auto& e : edges_)
        if (e.u == node || e.v == node)
            ++d;
    return d;
}

void WirelessGraph::validate(bool for_coding) const {
    if (num_nodes_ < 1)
        throw ArgumentError("graph needs at least one node");
    if (capacity_ < 1)
        throw ArgumentError("capacity must be positive");
    std::set<int> seen;
    for (int s : sources_) {
        if (!is_node(s))
            throw ArgumentError("source " + std::to_string(s) + " is not a declared node");
        if (!seen.insert(s).second)
            throw ArgumentError("duplicate source " + std::to_string(s));
    }
    if (sources_.size() < 2)
        throw ArgumentError("at least two sources required");
    if (for_coding && sources_.size() > 3)
        throw ArgumentError("coding operations support 2 or 3 sources");
    for (const auto& e : edges_) {
        if (!is_node(e.u) || !is_node(e.v))
            throw ArgumentError("edge endpoint outside declared nodes");
        if (e.u == e.v)
            throw ArgumentError("self-loops are not allowed");
    }
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

std::vector<int> parse_int_list(const std::string& text, int line_no) {
    std::vector<int> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty())
            throw ParseError(line_no, "empty entry in list");
        out.push_back(std::stoi(cur));
        cur.clear();
    };
    for (char c : text) {
        if (c == ',')
            flush();
        else
            cur.push_back(c);
    }
    flush();
    return out;
}

}  // namespace

WirelessGraph WirelessGraph::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::optional<WirelessGraph> g;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        auto toks = tokenize(line);
        if (toks.empty())
            continue;
        try {
            if (!g) {
                if (toks.size() != 6 || toks[0] != "nodes" || toks[2] != "sources" ||
                    toks[4] != "capacity")
                    throw ParseError(line_no,
                                     "expected header: nodes M sources s1,s2[,s3] capacity C");
                g.emplace(std::stoi(toks[1]), parse_int_list(toks[3], line_no),
                          std::stoi(toks[5]));
            } else if (toks[0] == "edge") {
                if (toks.size() != 3 && toks.size() != 4)
                    throw ParseError(line_no, "expected: edge u v [multiplicity]");
                g->add_edge(std::stoi(toks[1]), std::stoi(toks[2]),
                            toks.size() == 4 ? std::stoi(toks[3]) : 1);
            } else {
                throw ParseError(line_no, "unknown record '" + toks[0] + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    if (!g)
        throw ParseError(line_no, "missing header line");
    g->validate(false);
    return *g;
}

WirelessGraph WirelessGraph::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ArgumentError("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string WirelessGraph::serialize() const {
    std::ostringstream out;
    out << "nodes " << num_nodes_ << " sources ";
    for (size_t i = 0; i < sources_.size(); ++i)
        out << (i ? "," : "") << sources_[i];
    out << " capacity " << capacity_ << "\n";
    for (const auto& e : edges_)
        out << "edge " << e.u << " " << e.v << "\n";
    return out.str();
}

int WiredGraph::add_node(int base, bool primed) {
    int idx = static_cast<int>(nodes_.size());
    nodes_.push_back({base, primed});
    index_[{base, primed}] = idx;
    out_.emplace_back();
    in_.emplace_back();
    return idx;
}

void WiredGraph::add_wired_edge(int from, int to, int origin, bool broadcast) {
    int id = static_cast<int>(edges_.size());
    edges_.push_back({id, from, to, origin, broadcast});
    out_[from].push_back(id);
    in_[to].push_back(id);
    if (origin >= 0)
        by_origin_[origin].push_back(id);
}

int WiredGraph::node_index(int base, bool primed) const {
    auto it = index_.find({base, primed});
    return it == index_.end() ? -1 : it->second;
}

std::string WiredGraph::node_name(int index) const {
    const auto& n = nodes_.at(index);
    return std::to_string(n.base) + (n.primed ? "'" : "");
}

bool WiredGraph::node_is_source(int index) const {
    return wireless_.is_source(nodes_.at(index).base) && !nodes_.at(index).primed;
}

std::vector<int> WiredGraph::wired_of_wireless(int wireless_edge_id) const {
    auto it = by_origin_.find(wireless_edge_id);
    return it == by_origin_.end() ? std::vector<int>{} : it->second;
}

int WiredGraph::broadcast_edge_of(int relay) const {
    auto it = broadcast_.find(relay);
    return it == broadcast_.end() ? -1 : it->second;
}

std::string WiredGraph::dump() const {
    std::ostringstream out;
    out << "wired nodes " << nodes_.size() << " edges " << edges_.size() << " sources ";
    for (size_t i = 0; i < sources_.size(); ++i)
        out << (i ? "," : "") << sources_[i];
    out << " capacity " << capacity_ << "\n";
    for (const auto& e : edges_) {
        out << "wedge " << e.id << " " << node_name(e.from) << " " << node_name(e.to);
        if (e.broadcast)
            out << " broadcast";
        else
            out << " origin " << e.origin_edge;
        out << "\n";
    }
    return out.str();
}

WiredGraph split_relays(const WirelessGraph& g) {
    g.validate(false);
    WiredGraph w;
    w.wireless_ = g;
    w.sources_ = g.sources();
    w.capacity_ = g.capacity();
    for (int v = 1; v <= g.num_nodes(); ++v) {
        if (g.is_source(v)) {
            w.add_node(v, false);
        } else {
            w.add_node(v, false);
            w.add_node(v, true);
        }
    }
    // Broadcast edges first: (i, i') models the one-transmission-per-slot
    // constraint at relay i.
    for (int v = 1; v <= g.num_nodes(); ++v) {
        if (!g.is_source(v)) {
            w.broadcast_[v] = static_cast<int>(w.edges_.size());
            w.add_wired_edge(w.node_index(v, false), w.node_index(v, true), -1, true);
        }
    }
    for (const auto& e : g.edges()) {
        // Departures leave the primed half of a relay; arrivals enter the
        // unprimed half. Sources keep their single node.
        int u_out = w.node_index(e.u, !g.is_source(e.u));
        int u_in = w.node_index(e.u, false);
        int v_out = w.node_index(e.v, !g.is_source(e.v));
        int v_in = w.node_index(e.v, false);
        w.add_wired_edge(u_out, v_in, e.id, false);
        w.add_wired_edge(v_out, u_in, e.id, false);
    }
    return w;
}

EdgeMask full_mask(const WiredGraph& g) {
    return EdgeMask(g.edges().size(), 1);
}

namespace {

void check_source_sets(const WiredGraph& g, std::span<const int> from, std::span<const int> to) {
    if (from.empty() || to.empty())
        throw ArgumentError("source sets must be nonempty");
    std::set<int> f(from.begin(), from.end());
    for (int v : to)
        if (f.count(v))
            throw ArgumentError("source sets must be disjoint");
    for (int v : from)
        if (!g.wireless().is_source(v))
            throw ArgumentError("node " + std::to_string(v) + " is not a source");
    for (int v : to)
        if (!g.wireless().is_source(v))
            throw ArgumentError("node " + std::to_string(v) + " is not a source");
}

}  // namespace

int augment_flow(const WiredGraph& g, std::span<const int> from_nodes,
                 std::span<const int> to_nodes, const EdgeMask* mask, std::vector<char>& flow,
                 int max_units, bool reverse_order) {
    const int n = static_cast<int>(g.nodes().size());
    std::vector<char> is_target(n, 0);
    for (int v : to_nodes)
        is_target[v] = 1;
    int pushed = 0;
    while (max_units < 0 || pushed < max_units) {
        // BFS over the residual graph; forward arcs in ascending edge id
        // (descending when a route variant is requested).
        std::vector<std::pair<int, int>> parent(n, {-1, -1});  // (kind 0 fwd / 1 back, edge)
        std::vector<char> seen(n, 0);
        std::deque<int> q;
        for (int v : from_nodes) {
            if (!seen[v]) {
                seen[v] = 1;
                q.push_back(v);
            }
        }
        int hit = -1;
        for (int v : from_nodes)
            if (is_target[v])
                throw ArgumentError("flow endpoints overlap");
        auto ordered = [&](const std::vector<int>& ids) {
            std::vector<int> out(ids.begin(), ids.end());
            if (reverse_order)
                std::reverse(out.begin(), out.end());
            return out;
        };
        while (!q.empty() && hit < 0) {
            int u = q.front();
            q.pop_front();
            for (int eid : ordered(g.out_edges(u))) {
                if (mask && !(*mask)[eid])
                    continue;
                const auto& e = g.edges()[eid];
                if (!flow[eid] && !seen[e.to]) {
                    seen[e.to] = 1;
                    parent[e.to] = {0, eid};
                    if (is_target[e.to]) {
                        hit = e.to;
                        break;
                    }
                    q.push_back(e.to);
                }
            }
            if (hit >= 0)
                break;
            for (int eid : ordered(g.in_edges(u))) {
                const auto& e = g.edges()[eid];
                if (flow[eid] && !seen[e.from]) {
                    seen[e.from] = 1;
                    parent[e.from] = {1, eid};
                    if (is_target[e.from]) {
                        hit = e.from;
                        break;
                    }
                    q.push_back(e.from);
                }
            }
        }
        if (hit < 0)
            break;
        int cur = hit;
        while (parent[cur].second >= 0) {
            auto [kind, eid] = parent[cur];
            if (kind == 0) {
                flow[eid] = 1;
                cur = g.edges()[eid].from;
            } else {
                flow[eid] = 0;
                cur = g.edges()[eid].to;
            }
        }
        ++pushed;
    }
    return pushed;
}

FlowResult max_flow_units(const WiredGraph& g, std::span<const int> from,
                          std::span<const int> to, const EdgeMask* mask, int cap_limit) {
    std::vector<int> f_idx, t_idx;
    for (int v : from)
        f_idx.push_back(g.node_index(v, false));
    for (int v : to)
        t_idx.push_back(g.node_index(v, false));
    FlowResult r;
    r.edge_flow.assign(g.edges().size(), 0);
    r.value = augment_flow(g, f_idx, t_idx, mask, r.edge_flow, cap_limit);
    return r;
}

int min_cut(const WiredGraph& g, std::span<const int> from, std::span<const int> to,
            const EdgeMask* mask) {
    check_source_sets(g, from, to);
    return max_flow_units(g, from, to, mask, -1).value;
}

int min_cut(const WiredGraph& g, int from, int to, const EdgeMask* mask) {
    int f[1] = {from};
    int t[1] = {to};
    return min_cut(g, std::span<const int>(f), std::span<const int>(t), mask);
}

void cancel_flow_cycles(const WiredGraph& g, std::vector<char>& flow,
                        std::span<const int> avoid_nodes) {
    const int n = static_cast<int>(g.nodes().size());
    std::vector<char> avoid(n, 0);
    for (int v : avoid_nodes)
        avoid[v] = 1;
    bool cancelled = true;
    while (cancelled) {
        cancelled = false;
        std::vector<int> state(n, 0);  // 0 unseen, 1 on stack, 2 done
        std::vector<int> parent_edge(n, -1);
        std::vector<size_t> cursor(n, 0);
        for (int start = 0; start < n && !cancelled; ++start) {
            if (state[start] != 0 || avoid[start])
                continue;
            std::vector<int> stack{start};
            state[start] = 1;
            while (!stack.empty()) {
                int u = stack.back();
                const auto& outs = g.out_edges(u);
                bool descended = false;
                while (cursor[u] < outs.size()) {
                    int eid = outs[cursor[u]++];
                    if (!flow[eid])
                        continue;
                    int v = g.edges()[eid].to;
                    if (avoid[v])
                        continue;
                    if (state[v] == 1) {
                        flow[eid] = 0;
                        for (int x = u; x != v; x = g.edges()[parent_edge[x]].from)
                            flow[parent_edge[x]] = 0;
                        cancelled = true;
                        break;
                    }
                    if (state[v] == 0) {
                        state[v] = 1;
                        parent_edge[v] = eid;
                        stack.push_back(v);
                        descended = true;
                        break;
                    }
                }
                if (cancelled)
                    break;
                if (!descended) {
                    state[u] = 2;
                    stack.pop_back();
                }
            }
        }
    }
}

std::vector<std::vector<int>> decompose_flow_paths(const WiredGraph& g, std::vector<char> flow,
                                                   std::span<const int> from_nodes,
                                                   std::span<const int> stop_nodes) {
    std::vector<char> stop(g.nodes().size(), 0);
    for (int v : stop_nodes)
        stop[v] = 1;
    std::vector<std::vector<int>> paths;
    for (int s : from_nodes) {
        while (true) {
            std::vector<int> path;
            int cur = s;
            while (true) {
                if (!path.empty() && stop[cur])
                    break;
                int next_edge = -1;
                for (int eid : g.out_edges(cur)) {
                    if (flow[eid]) {
                        next_edge = eid;
                        break;
                    }
                }
                if (next_edge < 0)
                    break;
                flow[next_edge] = 0;
                path.push_back(next_edge);
                cur = g.edges()[next_edge].to;
            }
            if (path.empty())
                break;
            paths.push_back(std::move(path));
        }
    }
    return paths;
}

std::vector<std::vector<int>> edge_disjoint_paths(const WiredGraph& g, int s, int t, int k,
                                                  const EdgeMask* mask) {
    if (k < 0)
        throw ArgumentError("negative path count");
    if (k == 0)
        return {};
    int s_arr[1] = {s};
    int t_arr[1] = {t};
    check_source_sets(g, s_arr, t_arr);
    auto r = max_flow_units(g, s_arr, t_arr, mask, -1);
    if (k > r.value)
        throw InfeasibleError("requested " + std::to_string(k) + " disjoint paths, min cut is " +
                              std::to_string(r.value));
    cancel_flow_cycles(g, r.edge_flow, {});
    int s_node[1] = {g.node_index(s, false)};
    auto paths = decompose_flow_paths(g, r.edge_flow, s_node);
    paths.resize(k);
    return paths;
}

int hop_distance(const WiredGraph& g, int s, int t, const EdgeMask* mask) {
    int s_idx = g.node_index(s, false);
    int t_idx = g.node_index(t, false);
    if (s_idx < 0 || t_idx < 0)
        throw ArgumentError("unknown node");
    std::vector<int> dist(g.nodes().size(), -1);
    std::deque<int> q;
    dist[s_idx] = 0;
    q.push_back(s_idx);
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int eid : g.out_edges(u)) {
            if (mask && !(*mask)[eid])
                continue;
            const auto& e = g.edges()[eid];
            int w = e.broadcast ? 0 : 1;
            if (dist[e.to] == -1 || dist[u] + w < dist[e.to]) {
                dist[e.to] = dist[u] + w;
                if (w == 0)
                    q.push_front(e.to);
                else
                    q.push_back(e.to);
            }
        }
    }
    return dist[t_idx];
}

GraphMetrics compute_metrics(const WiredGraph& g) {
    GraphMetrics m;
    const auto& srcs = g.sources();
    for (size_t i = 0; i < srcs.size(); ++i) {
        for (size_t j = i + 1; j < srcs.size(); ++j) {
            m.pair_cut[{srcs[i], srcs[j]}] = min_cut(g, srcs[i], srcs[j]);
            int d = hop_distance(g, srcs[i], srcs[j]);
            m.max_pair_distance = std::max(m.max_pair_distance, d);
        }
    }
    m.h = -1;
    for (size_t i = 0; i < srcs.size(); ++i) {
        std::vector<int> rest;
        for (size_t j = 0; j < srcs.size(); ++j)
            if (j != i)
                rest.push_back(srcs[j]);
        int c = min_cut(g, std::span<const int>(&srcs[i], 1), rest);
        m.one_vs_rest[srcs[i]] = c;
        m.two_vs_one[srcs[i]] = min_cut(g, rest, std::span<const int>(&srcs[i], 1));
        if (m.h < 0 || c < m.h)
            m.h = c;
    }
    return m;
}

std::vector<int> wireless_footprint(const WiredGraph& g, std::span<const int> path) {
    std::vector<int> out;
    for (int eid : path) {
        const auto& e = g.edges()[eid];
        if (!e.broadcast)
            out.push_back(e.origin_edge);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int> path_relays(const WiredGraph& g, std::span<const int> path) {
    std::vector<int> out;
    for (int eid : path) {
        const auto& e = g.edges()[eid];
        if (e.broadcast)
            out.push_back(g.nodes()[e.from].base);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void remove_path_bidirectional(const WiredGraph& g, std::span<const int> path, EdgeMask& mask) {
    auto wireless = wireless_footprint(g, path);
    auto relays = path_relays(g, path);
    remove_wireless_edges(g, wireless, relays, mask);
}

void remove_wireless_edges(const WiredGraph& g, std::span<const int> wireless_edges,
                           std::span<const int> relays, EdgeMask& mask) {
    for (int we : wireless_edges)
        for (int eid : g.wired_of_wireless(we))
            mask[eid] = 0;
    for (int r : relays) {
        int b = g.broadcast_edge_of(r);
        if (b >= 0)
            mask[b] = 0;
    }
}

}  // namespace rtnc
