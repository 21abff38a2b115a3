#include "backlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "backlab/errors.hpp"

namespace backlab {

namespace {

// All simulated time is carried in exact 0.1 us ticks.
std::int64_t to_ticks(double us) {
    return static_cast<std::int64_t>(std::llround(us * 10.0));
}

struct Node {
    int stage = 0;
    std::int64_t counter = 0;
    std::int64_t hol_start_ticks = 0;
    // delay decomposition bookkeeping (check_delay_decomposition)
    std::int64_t countdown_ticks = 0;
    std::int64_t own_collisions = 0;
};

}  // namespace

void validate(const SimConfig& config) {
    if (config.n < 1) {
        throw std::invalid_argument("simulation needs at least one node");
    }
    if (config.total_slots < 1) {
        throw std::invalid_argument("total_slots must be at least 1");
    }
    if (config.max_stage_cap < 1) {
        throw std::invalid_argument("max_stage_cap must be at least 1");
    }
    if (!config.retry_limit.is_unlimited() &&
        config.max_stage_cap < config.retry_limit.value()) {
        throw std::invalid_argument(
            "max_stage_cap must cover the finite retry limit");
    }
    validate(config.phy);
    growth_factor(config.spec, 0);  // validates table presence
}

SimResult run(const SimConfig& config) {
    validate(config);

    const int n = config.n;
    const std::int64_t t_idle = to_ticks(config.phy.t_idle_us);
    const std::int64_t t_succ = to_ticks(config.phy.t_succ_us);
    const std::int64_t t_coll = to_ticks(config.phy.t_coll_us);

    // Highest stage a node can occupy: the bookkeeping cap, the retry limit,
    // or the end of a custom table, whichever binds first.
    int stage_cap = config.max_stage_cap;
    if (!config.retry_limit.is_unlimited()) {
        stage_cap = std::min(stage_cap, config.retry_limit.value());
    }
    if (config.spec.family == BackoffFamily::Table) {
        stage_cap = std::min(
            stage_cap, static_cast<int>(config.spec.table.size()) - 1);
    }

    // Integer windows per stage, precomputed.
    std::vector<std::int64_t> stage_window(stage_cap + 1);
    for (int k = 0; k <= stage_cap; ++k) {
        stage_window[k] = window(config.spec, k).integer_window;
    }

    std::mt19937_64 rng(config.seed);
    const auto draw = [&](int stage) {
        return std::uniform_int_distribution<std::int64_t>(
            0, stage_window[stage] - 1)(rng);
    };

    std::vector<Node> nodes(n);
    for (auto& node : nodes) {
        node.counter = draw(0);
    }

    SimResult result;
    result.seed_used = config.seed;
    result.per_node_successes.assign(n, 0);
    std::vector<std::int64_t> attempts_by_stage(stage_cap + 1, 0);
    std::vector<std::int64_t> collisions_by_stage(stage_cap + 1, 0);

    std::int64_t now = 0;
    std::int64_t total_attempts = 0;
    std::int64_t collided_attempts = 0;
    std::vector<int> transmitters;
    transmitters.reserve(n);

    for (std::int64_t slot = 0; slot < config.total_slots; ++slot) {
        transmitters.clear();
        for (int i = 0; i < n; ++i) {
            if (nodes[i].counter == 0) {
                transmitters.push_back(i);
            }
        }

        std::int64_t slot_ticks;
        if (transmitters.empty()) {
            slot_ticks = t_idle;
            ++result.idle_slots;
        } else if (transmitters.size() == 1) {
            slot_ticks = t_succ;
            ++result.successes;
        } else {
            slot_ticks = t_coll;
            ++result.collisions;
        }
        now += slot_ticks;

        // Non-transmitters count down one slot, of whatever length it had.
        if (config.check_delay_decomposition) {
            for (auto& node : nodes) {
                if (node.counter > 0) {
                    node.countdown_ticks += slot_ticks;
                }
            }
        }
        for (auto& node : nodes) {
            if (node.counter > 0) {
                --node.counter;
            }
        }

        if (transmitters.size() == 1) {
            const int who = transmitters.front();
            Node& node = nodes[who];
            ++attempts_by_stage[node.stage];
            ++total_attempts;
            ++result.per_node_successes[who];
            const std::int64_t delay = now - node.hol_start_ticks;
            result.delay_samples_us.push_back(delay / 10.0);
            if (config.check_delay_decomposition) {
                const std::int64_t expected = node.countdown_ticks +
                                              node.own_collisions * t_coll +
                                              t_succ;
                if (expected != delay) {
                    ++result.decomposition_mismatches;
                }
                node.countdown_ticks = 0;
                node.own_collisions = 0;
            }
            node.stage = 0;
            node.counter = draw(0);
            node.hol_start_ticks = now;  // saturation: next packet is ready
        } else if (transmitters.size() >= 2) {
            for (const int who : transmitters) {
                Node& node = nodes[who];
                ++attempts_by_stage[node.stage];
                ++collisions_by_stage[node.stage];
                ++total_attempts;
                ++collided_attempts;
                if (config.check_delay_decomposition) {
                    ++node.own_collisions;
                }
                if (!config.retry_limit.is_unlimited() &&
                    node.stage >= config.retry_limit.value()) {
                    // Retries exhausted: drop and start the next packet.
                    ++result.dropped_packets;
                    node.stage = 0;
                    node.hol_start_ticks = now;
                    if (config.check_delay_decomposition) {
                        node.countdown_ticks = 0;
                        node.own_collisions = 0;
                    }
                } else if (node.stage >= stage_cap) {
                    ++result.stage_cap_hits;
                } else {
                    ++node.stage;
                }
                node.counter = draw(node.stage);
            }
        }
    }

    result.sim_time_us = now / 10.0;
    result.throughput =
        now > 0 ? static_cast<double>(result.successes * t_succ) / now : 0.0;
    result.pc_overall =
        total_attempts > 0
            ? static_cast<double>(collided_attempts) / total_attempts
            : 0.0;
    const std::int64_t delivered = result.successes;
    result.loss_rate =
        (result.dropped_packets + delivered) > 0
            ? static_cast<double>(result.dropped_packets) /
                  (result.dropped_packets + delivered)
            : 0.0;
    for (int k = 0; k <= stage_cap; ++k) {
        if (attempts_by_stage[k] > 0) {
            result.pc_by_stage.push_back(
                {k, attempts_by_stage[k], collisions_by_stage[k],
                 static_cast<double>(collisions_by_stage[k]) /
                     attempts_by_stage[k]});
        }
    }
    return result;
}

std::vector<SimResult> replicate(const SimConfig& config, int runs,
                                 std::uint64_t seed_stride) {
    if (runs < 1) {
        throw std::invalid_argument("replicate needs at least one run");
    }
    validate(config);
    std::vector<SimResult> results(runs);
    const unsigned workers = std::min<unsigned>(
        std::max(1u, std::thread::hardware_concurrency()),
        static_cast<unsigned>(runs));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = static_cast<int>(w); i < runs;
                 i += static_cast<int>(workers)) {
                SimConfig c = config;
                c.seed = config.seed + seed_stride * static_cast<std::uint64_t>(i);
                results[static_cast<std::size_t>(i)] = run(c);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    return results;
}

}  // namespace backlab
