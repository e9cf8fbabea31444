#ifndef RTNC_H
#define RTNC_H

/*
 * C API for the real-time network coding library. All functions return a
 * status code; rtnc_last_error() describes the most recent failure on the
 * calling thread. Strings returned through out-parameters are heap-allocated
 * and must be released with rtnc_string_free().
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rtnc_graph rtnc_graph;
typedef struct rtnc_decomp rtnc_decomp;
typedef struct rtnc_trace rtnc_trace;

enum {
    RTNC_OK = 0,
    RTNC_ERR_USAGE = 1,      /* bad arguments, parse errors */
    RTNC_ERR_INFEASIBLE = 2, /* demanded flow/rate/decomposition cannot exist */
    RTNC_ERR_INTERNAL = 3    /* violated invariant; diagnostic in last_error */
};

const char* rtnc_version(void);
const char* rtnc_last_error(void);
void rtnc_string_free(char* s);

/* Graph text format (one record per line, '#' comments):
 *   nodes M sources s1,s2[,s3] capacity C
 *   edge u v [multiplicity]
 */
int rtnc_graph_parse(const char* text, rtnc_graph** out);
int rtnc_graph_load(const char* path, rtnc_graph** out);
int rtnc_graph_generate_er(int nodes, double edge_prob, unsigned long long seed, int capacity,
                           rtnc_graph** out);
int rtnc_graph_set_sources(rtnc_graph* g, const int* sources, int count);
void rtnc_graph_free(rtnc_graph* g);
int rtnc_graph_serialize(const rtnc_graph* g, char** out);

/* Relay-split directed graph dump (node i' is the output half of relay i). */
int rtnc_graph_transform_dump(const rtnc_graph* g, char** out);

/* Minimum cut between two disjoint source sets, in units of C. */
int rtnc_graph_min_cut(const rtnc_graph* g, const int* from, int nfrom, const int* to, int nto,
                       int* out_units);

/* Pairwise cuts, one-versus-rest cuts, h, and the distance bound. */
int rtnc_graph_metrics(const rtnc_graph* g, char** out);

/* session: "multicast" | "unicast" | "combined" */
int rtnc_decompose(const rtnc_graph* g, const char* session, rtnc_decomp** out);
int rtnc_decomp_dump(const rtnc_decomp* d, char** out);
int rtnc_decomp_stats(const rtnc_decomp* d, int* rings, int* linestars, int* h);
void rtnc_decomp_free(rtnc_decomp* d);

typedef struct {
    const char* mode;    /* "sync" | "async" */
    const char* session; /* "multicast" | "unicast" | "combined" */
    int delay_bound;
    unsigned long long seed;
    long long horizon;
    int record_events;    /* nonzero: keep the per-event trace */
    int routing_baseline; /* nonzero: store-and-forward instead of coding */
} rtnc_sim_params;

int rtnc_simulate(const rtnc_graph* g, const rtnc_sim_params* params, rtnc_trace** out);
int rtnc_trace_dump(const rtnc_trace* t, char** out);
int rtnc_trace_summary(const rtnc_trace* t, char** out);
int rtnc_trace_counters_csv(const rtnc_trace* t, char** out);
int rtnc_trace_stats(const rtnc_trace* t, long long* relay_tx, long long* source_tx,
                     long long* delivered, long long* max_delay);
void rtnc_trace_free(rtnc_trace* t);

typedef struct {
    const int* node_counts;
    int node_count_len;
    int graphs_per_size;
    int delay_bound;
    unsigned long long seed;
    int exact_node_limit; /* sizes above it are flagged heuristic */
    int reference_size;   /* 0: largest requested size */
} rtnc_experiment_params;

/* CSV schema: n,p,seed,metric,value,exact_flag (plus per-size avg_ rows). */
int rtnc_experiment(const rtnc_experiment_params* params, char** csv_out, char** metadata_out);

#ifdef __cplusplus
}
#endif

#endif /* RTNC_H */
