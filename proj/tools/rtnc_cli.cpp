// Command line front end. Talks to the shared library exclusively through
// the C API in rtnc.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtnc.h"

namespace {

int fail(int code) {
    std::cerr << "error: " << rtnc_last_error() << "\n";
    return code;
}

std::string take(char* s) {
    std::string out = s ? s : "";
    rtnc_string_free(s);
    return out;
}

bool write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out)
        return false;
    out << content;
    return static_cast<bool>(out);
}

struct GraphArgs {
    std::string path;
    std::vector<int> sources;

    int open(rtnc_graph** g) const {
        int rc = rtnc_graph_load(path.c_str(), g);
        if (rc != RTNC_OK)
            return rc;
        if (!sources.empty()) {
            rc = rtnc_graph_set_sources(*g, sources.data(),
                                        static_cast<int>(sources.size()));
            if (rc != RTNC_OK) {
                rtnc_graph_free(*g);
                *g = nullptr;
            }
        }
        return rc;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"real-time network coding toolkit"};
    app.require_subcommand(1);

    GraphArgs graph_args;
    std::string mode = "async";
    std::string session = "multicast";
    int delay_bound = 2;
    unsigned long long seed = 1;
    long long horizon = 200;
    std::string out_dir;
    bool routing = false;

    auto add_graph_flags = [&](CLI::App* cmd) {
        cmd->add_option("--graph", graph_args.path, "graph file")->required();
        cmd->add_option("--sources", graph_args.sources,
                        "override source nodes (a,b,c)")
            ->delimiter(',');
    };

    auto* transform = app.add_subcommand("transform", "print the relay-split directed graph");
    add_graph_flags(transform);

    auto* mincut = app.add_subcommand("mincut", "print the source cut values and h");
    add_graph_flags(mincut);
    std::vector<int> cut_from, cut_to;
    mincut->add_option("--from", cut_from, "cut tail source set")->delimiter(',');
    mincut->add_option("--to", cut_to, "cut head source set")->delimiter(',');

    auto* decompose = app.add_subcommand("decompose", "find the coding building blocks");
    add_graph_flags(decompose);
    decompose->add_option("--session", session, "multicast|unicast|combined");

    auto* simulate = app.add_subcommand("simulate", "run the discrete-event simulation");
    add_graph_flags(simulate);
    simulate->add_option("--session", session, "multicast|unicast|combined");
    simulate->add_option("--mode", mode, "sync|async");
    simulate->add_option("--delay-bound", delay_bound, "delay bound D");
    simulate->add_option("--seed", seed, "delay rng seed");
    simulate->add_option("--horizon", horizon, "slots to simulate");
    simulate->add_option("--out", out_dir, "directory for trace.txt and counters.csv");
    simulate->add_flag("--routing-baseline", routing, "store-and-forward baseline");

    auto* experiment = app.add_subcommand("experiment", "random-graph sweeps");
    std::vector<int> sizes{8, 16, 32, 64, 128};
    int graphs_per_size = 10;
    int exact_limit = 32;
    int reference_size = 0;
    experiment->add_option("--session", session, "multicast|unicast|combined");
    experiment->add_option("--sizes", sizes, "node counts")->delimiter(',');
    experiment->add_option("--graphs-per-size", graphs_per_size, "graphs per size");
    experiment->add_option("--delay-bound", delay_bound, "delay bound D");
    experiment->add_option("--seed", seed, "sweep seed");
    experiment->add_option("--exact-limit", exact_limit, "largest size solved exactly");
    experiment->add_option("--reference-size", reference_size,
                           "size whose expected degree spans the grid (0 = largest)");
    experiment->add_option("--out", out_dir, "directory for experiment.csv and metadata.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (transform->parsed()) {
        rtnc_graph* g = nullptr;
        int rc = graph_args.open(&g);
        if (rc != RTNC_OK)
            return fail(rc);
        char* dump = nullptr;
        rc = rtnc_graph_transform_dump(g, &dump);
        rtnc_graph_free(g);
        if (rc != RTNC_OK)
            return fail(rc);
        std::cout << take(dump);
        return 0;
    }

    if (mincut->parsed()) {
        rtnc_graph* g = nullptr;
        int rc = graph_args.open(&g);
        if (rc != RTNC_OK)
            return fail(rc);
        if (!cut_from.empty() || !cut_to.empty()) {
            int units = 0;
            rc = rtnc_graph_min_cut(g, cut_from.data(), static_cast<int>(cut_from.size()),
                                    cut_to.data(), static_cast<int>(cut_to.size()), &units);
            rtnc_graph_free(g);
            if (rc != RTNC_OK)
                return fail(rc);
            std::cout << "min_cut = " << units << "\n";
            return 0;
        }
        char* metrics = nullptr;
        rc = rtnc_graph_metrics(g, &metrics);
        rtnc_graph_free(g);
        if (rc != RTNC_OK)
            return fail(rc);
        std::cout << take(metrics);
        return 0;
    }

    if (decompose->parsed()) {
        rtnc_graph* g = nullptr;
        int rc = graph_args.open(&g);
        if (rc != RTNC_OK)
            return fail(rc);
        rtnc_decomp* d = nullptr;
        rc = rtnc_decompose(g, session.c_str(), &d);
        rtnc_graph_free(g);
        if (rc != RTNC_OK)
            return fail(rc);
        char* dump = nullptr;
        int rings = 0, linestars = 0, h = 0;
        rtnc_decomp_dump(d, &dump);
        rtnc_decomp_stats(d, &rings, &linestars, &h);
        rtnc_decomp_free(d);
        std::cout << take(dump);
        std::cout << "rings=" << rings << " linestars=" << linestars << " h=" << h << "\n";
        return 0;
    }

    if (simulate->parsed()) {
        rtnc_graph* g = nullptr;
        int rc = graph_args.open(&g);
        if (rc != RTNC_OK)
            return fail(rc);
        rtnc_sim_params params{};
        params.mode = mode.c_str();
        params.session = session.c_str();
        params.delay_bound = delay_bound;
        params.seed = seed;
        params.horizon = horizon;
        params.record_events = 1;
        params.routing_baseline = routing ? 1 : 0;
        rtnc_trace* t = nullptr;
        rc = rtnc_simulate(g, &params, &t);
        rtnc_graph_free(g);
        if (rc != RTNC_OK)
            return fail(rc);
        char* summary = nullptr;
        rtnc_trace_summary(t, &summary);
        std::cout << take(summary) << "\n";
        if (!out_dir.empty()) {
            char* dump = nullptr;
            char* counters = nullptr;
            rtnc_trace_dump(t, &dump);
            rtnc_trace_counters_csv(t, &counters);
            bool ok = write_file(out_dir, "trace.txt", take(dump)) &&
                      write_file(out_dir, "counters.csv", take(counters));
            if (!ok) {
                rtnc_trace_free(t);
                std::cerr << "error: cannot write into " << out_dir << "\n";
                return 1;
            }
        }
        rtnc_trace_free(t);
        return 0;
    }

    if (experiment->parsed()) {
        rtnc_experiment_params params{};
        params.node_counts = sizes.data();
        params.node_count_len = static_cast<int>(sizes.size());
        params.graphs_per_size = graphs_per_size;
        params.delay_bound = delay_bound;
        params.seed = seed;
        params.exact_node_limit = exact_limit;
        params.reference_size = reference_size;
        char* csv = nullptr;
        char* meta = nullptr;
        int rc = rtnc_experiment(&params, &csv, &meta);
        if (rc != RTNC_OK)
            return fail(rc);
        std::string csv_s = take(csv);
        std::string meta_s = take(meta);
        if (!out_dir.empty()) {
            if (!write_file(out_dir, "experiment.csv", csv_s) ||
                !write_file(out_dir, "metadata.txt", meta_s)) {
                std::cerr << "error: cannot write into " << out_dir << "\n";
                return 1;
            }
            std::cout << "wrote " << out_dir << "/experiment.csv\n";
        } else {
            std::cout << csv_s;
        }
        return 0;
    }

    return 1;
}
