#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "backlab/backoff.hpp"
#include "backlab/phy.hpp"

namespace backlab {

// Default seed for reproducible runs; override per scenario.
inline constexpr std::uint64_t kDefaultSeed = 0xB10C5EEDull;

struct SimConfig {
    int n = 10;
    BackoffSpec spec;
    RetryLimit retry_limit = RetryLimit::unlimited();
    PhyProfile phy;
    std::int64_t total_slots = 1'000'000;
    std::uint64_t seed = kDefaultSeed;
    int max_stage_cap = 64;
    // Independently accumulate each packet's delay decomposition (countdown
    // time + own collisions + success slot) and count samples that disagree
    // with the recorded delay. Costs a little memory; off by default.
    bool check_delay_decomposition = false;
};

void validate(const SimConfig& config);

struct StageStats {
    int stage;
    std::int64_t attempts;
    std::int64_t collisions;
    double pc;  // collisions / attempts
};

struct SimResult {
    double sim_time_us = 0.0;
    std::int64_t successes = 0;
    std::int64_t collisions = 0;  // collision slots
    std::int64_t idle_slots = 0;
    double throughput = 0.0;  // success airtime / elapsed time
    double pc_overall = 0.0;  // collided attempts / attempts
    std::vector<StageStats> pc_by_stage;
    std::vector<double> delay_samples_us;
    std::int64_t dropped_packets = 0;
    double loss_rate = 0.0;  // dropped / (dropped + delivered)
    std::vector<std::int64_t> per_node_successes;
    std::uint64_t seed_used = 0;
    std::string generator = "mt19937_64";
    std::int64_t stage_cap_hits = 0;
    std::int64_t decomposition_mismatches = 0;
};

// Slotted simulation of n saturated nodes. Per generic slot: the nodes whose
// counters reached zero transmit; zero transmitters makes an idle slot, one a
// success, two or more a collision. Every non-transmitting node decrements
// its counter once per slot regardless of the slot type. Counters are drawn
// uniformly from [0, W_k - 1] using the integer window of the current stage;
// a fresh head-of-line packet is available immediately after every success
// or drop. Time advances by the slot length in exact 0.1 us ticks.
SimResult run(const SimConfig& config);

// Independent runs seeded seed, seed + stride, ...; deterministic.
std::vector<SimResult> replicate(const SimConfig& config, int runs,
                                 std::uint64_t seed_stride = 1);

}  // namespace backlab
