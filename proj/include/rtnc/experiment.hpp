#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtnc/sim.hpp"

namespace rtnc {

// G(n, p): every unordered pair becomes a link independently with
// probability p; the first three nodes are the sources.
WirelessGraph generate_er(int n, double p, uint64_t seed, int capacity = 8);

struct ExperimentSpec {
    std::vector<int> node_counts{8, 16, 32, 64, 128};
    int graphs_per_size = 10;
    SessionType session = SessionType::Multicast;
    int delay_bound = 2;
    uint64_t seed = 1;
    // Expected-degree grid endpoints at the reference size; each sweep uses
    // five fixed edge probabilities (two seeded replicas each) shared across
    // sizes, so connectivity grows with the network scale.
    double degree_min = 2.0;
    double degree_max = 8.0;
    int reference_size = 0;  // 0: the largest requested size
    int exact_node_limit = 32;
    int field_width = 8;
};

struct ExperimentResult {
    std::string csv;       // n,p,seed,metric,value,exact_flag
    std::string metadata;  // run parameters: degree grid, rng, field polynomial
};

// Per-graph rows plus per-size "avg_*" aggregate rows. Deterministic under
// (spec, seed).
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace rtnc
