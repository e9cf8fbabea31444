#include "rtnc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

namespace rtnc {

WirelessGraph generate_er(int n, double p, uint64_t seed, int capacity) {
    if (n < 3)
        throw ArgumentError("ER generation needs at least three nodes");
    if (p < 0.0 || p > 1.0)
        throw ArgumentError("edge probability must be in [0, 1]");
    WirelessGraph g(n, {1, 2, 3}, capacity);
    std::mt19937_64 rng(seed);
    for (int u = 1; u <= n; ++u) {
        for (int v = u + 1; v <= n; ++v) {
            double draw = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (draw < p)
                g.add_edge(u, v);
        }
    }
    return g;
}

namespace {

uint64_t mix(uint64_t a, uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
    return a;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct Row {
    int n;
    std::string p;
    std::string seed;
    std::string metric;
    std::string value;
    std::string flag;
};

void emit(std::ostringstream& out, const Row& r) {
    out << r.n << "," << r.p << "," << r.seed << "," << r.metric << "," << r.value << ","
        << r.flag << "\n";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    for (int n : spec.node_counts)
        if (n < 4)
            throw ArgumentError("sweep sizes need at least four nodes (three sources plus "
                                "a relay)");
    std::ostringstream csv;
    csv << "n,p,seed,metric,value,exact_flag\n";
    std::ostringstream meta;
    meta << "sizes=";
    for (size_t i = 0; i < spec.node_counts.size(); ++i)
        meta << (i ? "," : "") << spec.node_counts[i];
    meta << " graphs_per_size=" << spec.graphs_per_size << " degree_grid_at_reference=[" << spec.degree_min
         << "," << spec.degree_max << "]x5 session="
         << (spec.session == SessionType::Multicast
                 ? "multicast"
                 : spec.session == SessionType::Unicast ? "unicast" : "combined")
         << " D=" << spec.delay_bound << " seed=" << spec.seed
         << " rng=mt19937_64 payload_gen=splitmix64 field=GF(2^" << spec.field_width
         << ") poly=0x" << std::hex << Field::primitive_poly(spec.field_width) << std::dec
         << " exact_node_limit=" << spec.exact_node_limit << "\n";

    const int degrees = 5;
    int reference = spec.reference_size;
    for (int n : spec.node_counts)
        reference = std::max(reference, n);
    for (int n : spec.node_counts) {
        std::map<std::string, double> sums;
        int samples = 0;
        for (int g_idx = 0; g_idx < spec.graphs_per_size; ++g_idx) {
            double frac = degrees == 1 ? 0 : static_cast<double>(g_idx % degrees) / (degrees - 1);
            double degree = spec.degree_min + (spec.degree_max - spec.degree_min) * frac;
            double p = std::min(1.0, degree / (reference - 1));
            uint64_t gseed = mix(mix(spec.seed, static_cast<uint64_t>(n)),
                                 static_cast<uint64_t>(g_idx));
            auto wg = generate_er(n, p, gseed, spec.field_width);
            auto g = split_relays(wg);
            bool exact = n <= spec.exact_node_limit;
            std::string flag = exact ? "exact" : "heuristic";
            std::string pstr = fmt(p);
            std::string sstr = std::to_string(gseed);
            meta << "graph n=" << n << " idx=" << g_idx << " degree=" << degree
                 << " p=" << pstr << " seed=" << sstr << "\n";

            std::map<std::string, double> vals;
            auto metrics = compute_metrics(g);
            vals["h"] = metrics.h;

            // Corner point maximizing the 1-2 rate first: |P_{1;2}| = C_{1;2}
            // and |P_{1;3}| = C_{1;2,3} - C_{1;2} path units.
            vals["p12"] = metrics.pair_cut.at({1, 2});
            vals["p13"] = metrics.one_vs_rest.at(1) - metrics.pair_cut.at({1, 2});
            auto plan = unicast_corner(g, {1, 2});
            int uni_relays = 0;
            for (const auto& b : plan.blocks)
                uni_relays += static_cast<int>(b.relays.size());
            vals["uni_tx_coding"] = uni_relays;
            vals["uni_tx_routing"] = 2 * uni_relays;

            // Multicast decomposition sizes and structural relay loads per
            // two-slot epoch.
            DecomposeOptions opts;
            opts.exhaustive_ring_edge_limit = exact ? 24 : 0;
            auto d = decompose_multicast(g, opts);
            vals["rings"] = static_cast<double>(d.rings.size());
            vals["linestars"] = static_cast<double>(d.linestars.size());
            if (2 * static_cast<int>(d.rings.size()) + static_cast<int>(d.linestars.size()) <
                d.h)
                throw InternalError("sweep decomposition violates the capacity bound\n" +
                                    wg.serialize());
            int ring_relays = 0, ls_relays = 0;
            for (const auto& b : d.rings)
                ring_relays += static_cast<int>(b.relays.size());
            for (const auto& b : d.linestars)
                ls_relays += static_cast<int>(b.relays.size());
            vals["mc_tx_coding"] = 2 * (ring_relays + ls_relays);
            vals["mc_tx_routing"] = 4 * ring_relays + 3 * ls_relays;

            for (const auto& [k, v] : vals) {
                emit(csv, {n, pstr, sstr, k, fmt(v), flag});
                sums[k] += v;
            }
            ++samples;
        }
        for (const auto& [k, v] : sums)
            emit(csv, {n, "", "", "avg_" + k, fmt(v / samples),
                       n <= spec.exact_node_limit ? "exact" : "heuristic"});
    }
    return {csv.str(), meta.str()};
}

}  // namespace rtnc
