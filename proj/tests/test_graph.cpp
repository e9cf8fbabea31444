#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "rtnc/graph.hpp"

using namespace rtnc;

namespace {

WirelessGraph line_graph(int m) {
    WirelessGraph g(m, {1, m}, 1);
    for (int v = 1; v < m; ++v)
        g.add_edge(v, v + 1);
    return g;
}

WirelessGraph star_graph() {
    // Sources 1,2,3 around relay 4.
    WirelessGraph g(4, {1, 2, 3}, 1);
    g.add_edge(1, 4);
    g.add_edge(2, 4);
    g.add_edge(3, 4);
    return g;
}

// Network of the unicast worked example: C_{1;3} = 3C, C_{1;2,3} = 5C.
// Three relay-disjoint 1-3 paths plus two relay-disjoint 1-2 paths.
WirelessGraph unicast_example_graph() {
    WirelessGraph g(8, {1, 2, 3}, 1);
    g.add_edge(1, 4);
    g.add_edge(4, 3);
    g.add_edge(1, 5);
    g.add_edge(5, 3);
    g.add_edge(1, 6);
    g.add_edge(6, 3);
    g.add_edge(1, 7);
    g.add_edge(7, 2);
    g.add_edge(1, 8);
    g.add_edge(8, 2);
    return g;
}

}  // namespace

TEST_CASE("split: two sources joined by one relay") {
    WirelessGraph g(3, {1, 2}, 1);
    g.add_edge(1, 3);
    g.add_edge(2, 3);
    auto w = split_relays(g);
    CHECK(w.nodes().size() == 4);  // 1, 2, r, r'
    CHECK(w.edges().size() == 5);  // (1,r),(r',1),(2,r),(r',2),(r,r')
    int bc = 0;
    for (const auto& e : w.edges())
        bc += e.broadcast;
    CHECK(bc == 1);
    CHECK(w.node_index(3, true) >= 0);
    CHECK(w.node_index(1, true) == -1);
}

TEST_CASE("split: triangle of sources has no primed nodes") {
    WirelessGraph g(3, {1, 2, 3}, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    g.add_edge(1, 3);
    auto w = split_relays(g);
    CHECK(w.nodes().size() == 3);
    CHECK(w.edges().size() == 6);  // both directions of each edge
    for (const auto& e : w.edges())
        CHECK(!e.broadcast);
}

TEST_CASE("split: 5-node line") {
    auto w = split_relays(line_graph(5));
    CHECK(w.nodes().size() == 8);  // 2 sources + 3 relay pairs
    int bc = 0;
    for (const auto& e : w.edges())
        bc += e.broadcast;
    CHECK(bc == 3);
    CHECK(w.edges().size() == 11);  // 4 wireless edges * 2 + 3 broadcast
    // Structural invariants: primed nodes only fed by their twin; unprimed
    // relay nodes only drain into their twin.
    for (const auto& e : w.edges()) {
        const auto& to = w.nodes()[e.to];
        const auto& from = w.nodes()[e.from];
        if (to.primed)
            CHECK((e.broadcast && from.base == to.base));
        if (!from.primed && !w.node_is_source(e.from))
            CHECK((e.broadcast && from.base == to.base));
    }
    // Round-trip map covers every wireless edge with both directions.
    for (const auto& we : w.wireless().edges())
        CHECK(w.wired_of_wireless(we.id).size() == 2);
}

TEST_CASE("min cut on lines and stars") {
    for (int m : {2, 3, 4, 5}) {
        auto w = split_relays(line_graph(m));
        CHECK(min_cut(w, 1, m) == 1);
    }
    auto w = split_relays(star_graph());
    int pair[2] = {1, 2};
    int other[1] = {3};
    CHECK(min_cut(w, pair, other) == 1);
    CHECK(min_cut(w, other, pair) == 1);
}

TEST_CASE("min cut argument errors") {
    auto w = split_relays(star_graph());
    int a[2] = {1, 2};
    int b[1] = {2};
    CHECK_THROWS_AS(min_cut(w, a, b), ArgumentError);
    CHECK_THROWS_AS(min_cut(w, std::span<const int>{}, std::span<const int>(a, 2)),
                    ArgumentError);
}

TEST_CASE("disconnected sources have cut zero") {
    WirelessGraph g(4, {1, 2}, 1);
    g.add_edge(1, 3);
    g.add_edge(2, 4);
    auto w = split_relays(g);
    CHECK(min_cut(w, 1, 2) == 0);
}

TEST_CASE("unicast example cut values") {
    auto w = split_relays(unicast_example_graph());
    CHECK(min_cut(w, 1, 3) == 3);
    int one[1] = {1};
    int rest[2] = {2, 3};
    CHECK(min_cut(w, one, rest) == 5);
    CHECK(min_cut(w, rest, one) == 5);
    CHECK(min_cut(w, 1, 2) == 2);
}

TEST_CASE("edge-disjoint paths") {
    auto w = split_relays(unicast_example_graph());
    auto paths = edge_disjoint_paths(w, 1, 3, 3);
    CHECK(paths.size() == 3);
    std::set<int> used;
    for (const auto& p : paths) {
        // Simple path from 1 to 3.
        CHECK(w.edges()[p.front()].from == w.node_index(1, false));
        CHECK(w.edges()[p.back()].to == w.node_index(3, false));
        std::set<int> nodes_seen;
        for (int eid : p) {
            CHECK(!used.count(eid));
            used.insert(eid);
            CHECK(nodes_seen.insert(w.edges()[eid].to).second);
        }
    }
    CHECK(edge_disjoint_paths(w, 1, 3, 0).empty());
    CHECK_THROWS_AS(edge_disjoint_paths(w, 1, 3, 4), InfeasibleError);
}

TEST_CASE("single path on a line") {
    auto w = split_relays(line_graph(4));
    auto paths = edge_disjoint_paths(w, 1, 4, 1);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].size() == 5);  // 3 wireless hops + 2 broadcast edges
}

TEST_CASE("metrics of canonical graphs") {
    auto star = split_relays(star_graph());
    auto m = compute_metrics(star);
    CHECK(m.h == 1);
    CHECK(m.one_vs_rest.at(1) == 1);
    CHECK(m.two_vs_one.at(3) == 1);
    CHECK(m.max_pair_distance == 2);

    auto uni = split_relays(unicast_example_graph());
    auto mu = compute_metrics(uni);
    CHECK(mu.pair_cut.at({1, 3}) == 3);
    CHECK(mu.one_vs_rest.at(1) == 5);

    // Single edge between two sources.
    WirelessGraph pair(2, {1, 2}, 1);
    pair.add_edge(1, 2);
    auto wp = split_relays(pair);
    auto mp = compute_metrics(wp);
    CHECK(mp.h == 1);
    CHECK(mp.max_pair_distance == 1);
}

TEST_CASE("line distances exclude broadcast edges") {
    auto w = split_relays(line_graph(5));
    CHECK(hop_distance(w, 1, 5) == 4);  // L = M - 1
}

TEST_CASE("min cut agrees with brute-force cut enumeration on random graphs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 3 + static_cast<int>(rng() % 3);  // 3..5 nodes
        WirelessGraph g(n, {1, 2}, 1);
        int target_edges = 2 + static_cast<int>(rng() % 4);
        for (int e = 0; e < target_edges; ++e) {
            int u = 1 + static_cast<int>(rng() % n);
            int v = 1 + static_cast<int>(rng() % n);
            if (u != v)
                g.add_edge(u, v);
        }
        auto w = split_relays(g);
        if (w.edges().size() > 12)
            continue;
        int fast = min_cut(w, 1, 2);
        int brute = oracle::min_cut_bruteforce(w, {1}, {2});
        CHECK(fast == brute);
        // Symmetry between source nodes.
        CHECK(fast == min_cut(w, 2, 1));
    }
}

TEST_CASE("source connectivity bounded by wireless degree") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 4 + static_cast<int>(rng() % 3);
        WirelessGraph g(n, {1, 2, 3}, 1);
        for (int e = 0; e < 6; ++e) {
            int u = 1 + static_cast<int>(rng() % n);
            int v = 1 + static_cast<int>(rng() % n);
            if (u != v)
                g.add_edge(u, v);
        }
        auto w = split_relays(g);
        CHECK(min_cut(w, 1, 2) <= g.degree(1));
        CHECK(min_cut(w, 1, 2) <= g.degree(2));
    }
}

TEST_CASE("graph text format round trip and errors") {
    std::string text =
        "# demo\n"
        "nodes 4 sources 1,2,3 capacity 8\n"
        "edge 1 4\n"
        "edge 2 4\n"
        "edge 3 4 2\n";
    auto g = WirelessGraph::parse(text);
    CHECK(g.num_nodes() == 4);
    CHECK(g.capacity() == 8);
    CHECK(g.edges().size() == 4);  // multiplicity expands
    auto round = WirelessGraph::parse(g.serialize());
    CHECK(round.serialize() == g.serialize());

    CHECK_THROWS_AS(WirelessGraph::parse("nodes x\n"), ParseError);
    CHECK_THROWS_AS(WirelessGraph::parse("nodes 3 sources 1,2 capacity 1\nedge 1 9\n"),
                    ParseError);
    try {
        WirelessGraph::parse("nodes 3 sources 1,2 capacity 1\nbogus\n");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("parallel edges realize multi-unit direct cuts") {
    WirelessGraph g(2, {1, 2}, 1);
    g.add_edge(1, 2, 3);
    auto w = split_relays(g);
    CHECK(min_cut(w, 1, 2) == 3);
}
