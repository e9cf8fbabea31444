#include "rtnc.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "rtnc/experiment.hpp"
#include "rtnc/sim.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int set_error(int code, const std::string& what) {
    g_last_error = what;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return RTNC_OK;
    } catch (const rtnc::ParseError& e) {
        return set_error(RTNC_ERR_USAGE, e.what());
    } catch (const rtnc::ArgumentError& e) {
        return set_error(RTNC_ERR_USAGE, e.what());
    } catch (const rtnc::InfeasibleError& e) {
        return set_error(RTNC_ERR_INFEASIBLE, e.what());
    } catch (const std::exception& e) {
        return set_error(RTNC_ERR_INTERNAL, e.what());
    }
}

rtnc::SessionType session_of(const char* s) {
    std::string v = s ? s : "multicast";
    if (v == "multicast")
        return rtnc::SessionType::Multicast;
    if (v == "unicast")
        return rtnc::SessionType::Unicast;
    if (v == "combined")
        return rtnc::SessionType::Combined;
    throw rtnc::ArgumentError("unknown session '" + v + "'");
}

}  // namespace

struct rtnc_graph {
    rtnc::WirelessGraph wireless;
    rtnc::WiredGraph wired;
};

struct rtnc_decomp {
    std::vector<rtnc::Block> blocks;
    std::string dump;
    int rings = 0;
    int linestars = 0;
    int h = 0;
};

struct rtnc_trace {
    rtnc::SimTrace trace;
};

extern "C" {

const char* rtnc_version(void) {
    return "rtnc 1.0.0";
}

const char* rtnc_last_error(void) {
    return g_last_error.c_str();
}

void rtnc_string_free(char* s) {
    std::free(s);
}

int rtnc_graph_parse(const char* text, rtnc_graph** out) {
    return guarded([&] {
        if (!text || !out)
            throw rtnc::ArgumentError("null argument");
        auto wireless = rtnc::WirelessGraph::parse(text);
        *out = new rtnc_graph{wireless, rtnc::split_relays(wireless)};
    });
}

int rtnc_graph_load(const char* path, rtnc_graph** out) {
    return guarded([&] {
        if (!path || !out)
            throw rtnc::ArgumentError("null argument");
        auto wireless = rtnc::WirelessGraph::load(path);
        *out = new rtnc_graph{wireless, rtnc::split_relays(wireless)};
    });
}

int rtnc_graph_generate_er(int nodes, double edge_prob, unsigned long long seed, int capacity,
                           rtnc_graph** out) {
    return guarded([&] {
        if (!out)
            throw rtnc::ArgumentError("null argument");
        auto wireless = rtnc::generate_er(nodes, edge_prob, seed, capacity);
        *out = new rtnc_graph{wireless, rtnc::split_relays(wireless)};
    });
}

int rtnc_graph_set_sources(rtnc_graph* g, const int* sources, int count) {
    return guarded([&] {
        if (!g || !sources || count < 2)
            throw rtnc::ArgumentError("need a graph and at least two sources");
        rtnc::WirelessGraph next(g->wireless.num_nodes(),
                                 std::vector<int>(sources, sources + count),
                                 g->wireless.capacity());
        for (const auto& e : g->wireless.edges())
            next.add_edge(e.u, e.v);
        next.validate(false);
        g->wireless = next;
        g->wired = rtnc::split_relays(next);
    });
}

void rtnc_graph_free(rtnc_graph* g) {
    delete g;
}

int rtnc_graph_serialize(const rtnc_graph* g, char** out) {
    return guarded([&] {
        if (!g || !out)
            throw rtnc::ArgumentError("null argument");
        *out = dup_string(g->wireless.serialize());
    });
}

int rtnc_graph_transform_dump(const rtnc_graph* g, char** out) {
    return guarded([&] {
        if (!g || !out)
            throw rtnc::ArgumentError("null argument");
        *out = dup_string(g->wired.dump());
    });
}

int rtnc_graph_min_cut(const rtnc_graph* g, const int* from, int nfrom, const int* to, int nto,
                       int* out_units) {
    return guarded([&] {
        if (!g || !from || !to || !out_units)
            throw rtnc::ArgumentError("null argument");
        *out_units = rtnc::min_cut(g->wired, std::span<const int>(from, nfrom),
                                   std::span<const int>(to, nto));
    });
}

int rtnc_graph_metrics(const rtnc_graph* g, char** out) {
    return guarded([&] {
        if (!g || !out)
            throw rtnc::ArgumentError("null argument");
        auto m = rtnc::compute_metrics(g->wired);
        std::ostringstream os;
        for (const auto& [pair, cut] : m.pair_cut)
            os << "cut " << pair.first << ";" << pair.second << " = " << cut << "\n";
        for (const auto& [src, cut] : m.one_vs_rest)
            os << "cut " << src << ";rest = " << cut << "\n";
        os << "h = " << m.h << "\n";
        os << "max_pair_distance = " << m.max_pair_distance << "\n";
        *out = dup_string(os.str());
    });
}

int rtnc_decompose(const rtnc_graph* g, const char* session, rtnc_decomp** out) {
    return guarded([&] {
        if (!g || !out)
            throw rtnc::ArgumentError("null argument");
        auto kind = session_of(session);
        auto d = new rtnc_decomp;
        try {
            d->blocks = rtnc::deployment_for_session(g->wired, kind);
            for (const auto& b : d->blocks) {
                d->rings += b.type == rtnc::Block::Ring;
                d->linestars += b.type == rtnc::Block::LineStar;
            }
            d->h = g->wired.sources().size() >= 2 ? rtnc::compute_metrics(g->wired).h : 0;
            d->dump = rtnc::dump_blocks(g->wired, d->blocks);
        } catch (...) {
            delete d;
            throw;
        }
        *out = d;
    });
}

int rtnc_decomp_dump(const rtnc_decomp* d, char** out) {
    return guarded([&] {
        if (!d || !out)
            throw rtnc::ArgumentError("null argument");
        *out = dup_string(d->dump);
    });
}

int rtnc_decomp_stats(const rtnc_decomp* d, int* rings, int* linestars, int* h) {
    return guarded([&] {
        if (!d)
            throw rtnc::ArgumentError("null argument");
        if (rings)
            *rings = d->rings;
        if (linestars)
            *linestars = d->linestars;
        if (h)
            *h = d->h;
    });
}

void rtnc_decomp_free(rtnc_decomp* d) {
    delete d;
}

int rtnc_simulate(const rtnc_graph* g, const rtnc_sim_params* params, rtnc_trace** out) {
    return guarded([&] {
        if (!g || !params || !out)
            throw rtnc::ArgumentError("null argument");
        rtnc::SimConfig cfg;
        cfg.graph = &g->wired;
        std::string mode = params->mode ? params->mode : "sync";
        if (mode != "sync" && mode != "async")
            throw rtnc::ArgumentError("unknown mode '" + mode + "'");
        cfg.mode = mode == "sync" ? rtnc::CodecMode::Sync : rtnc::CodecMode::Async;
        cfg.session = session_of(params->session);
        cfg.blocks = rtnc::deployment_for_session(g->wired, cfg.session);
        cfg.delay.bound = params->delay_bound > 0 ? params->delay_bound : 1;
        if (cfg.mode == rtnc::CodecMode::Sync)
            cfg.delay.bound = 1;
        cfg.delay.kind = cfg.delay.bound == 1 ? rtnc::DelayModel::Fixed1
                                              : rtnc::DelayModel::Uniform;
        cfg.delay.seed = params->seed;
        cfg.horizon = params->horizon > 0 ? params->horizon : 200;
        cfg.record_events = params->record_events != 0;
        cfg.routing = params->routing_baseline != 0;
        cfg.field_width = g->wireless.capacity() >= 2 && g->wireless.capacity() <= 16
                              ? g->wireless.capacity()
                              : 8;
        if (g->wired.sources().size() == 3)
            cfg.h_blocks = std::max(1, rtnc::compute_metrics(g->wired).h);
        *out = new rtnc_trace{rtnc::run(cfg)};
    });
}

int rtnc_trace_dump(const rtnc_trace* t, char** out) {
    return guarded([&] {
        if (!t || !out)
            throw rtnc::ArgumentError("null argument");
        *out = dup_string(t->trace.dump());
    });
}

int rtnc_trace_summary(const rtnc_trace* t, char** out) {
    return guarded([&] {
        if (!t || !out)
            throw rtnc::ArgumentError("null argument");
        *out = dup_string(t->trace.summary());
    });
}

int rtnc_trace_counters_csv(const rtnc_trace* t, char** out) {
    return guarded([&] {
        if (!t || !out)
            throw rtnc::ArgumentError("null argument");
        *out = dup_string(t->trace.counters_csv());
    });
}

int rtnc_trace_stats(const rtnc_trace* t, long long* relay_tx, long long* source_tx,
                     long long* delivered, long long* max_delay) {
    return guarded([&] {
        if (!t)
            throw rtnc::ArgumentError("null argument");
        if (relay_tx)
            *relay_tx = t->trace.relay_tx;
        if (source_tx)
            *source_tx = t->trace.source_tx;
        if (delivered)
            *delivered = t->trace.delivered;
        if (max_delay) {
            long long worst = 0;
            for (const auto& [k, v] : t->trace.max_delay)
                worst = std::max(worst, static_cast<long long>(v));
            *max_delay = worst;
        }
    });
}

void rtnc_trace_free(rtnc_trace* t) {
    delete t;
}

int rtnc_experiment(const rtnc_experiment_params* params, char** csv_out, char** metadata_out) {
    return guarded([&] {
        if (!params || !csv_out)
            throw rtnc::ArgumentError("null argument");
        rtnc::ExperimentSpec spec;
        if (params->node_counts && params->node_count_len > 0)
            spec.node_counts.assign(params->node_counts,
                                    params->node_counts + params->node_count_len);
        if (params->graphs_per_size > 0)
            spec.graphs_per_size = params->graphs_per_size;
        if (params->delay_bound > 0)
            spec.delay_bound = params->delay_bound;
        spec.seed = params->seed;
        if (params->exact_node_limit > 0)
            spec.exact_node_limit = params->exact_node_limit;
        spec.reference_size = params->reference_size;
        auto r = rtnc::run_experiment(spec);
        *csv_out = dup_string(r.csv);
        if (metadata_out)
            *metadata_out = dup_string(r.metadata);
    });
}

}  // extern "C"
