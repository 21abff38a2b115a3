#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "backlab/backoff.hpp"
#include "backlab/phy.hpp"
#include "backlab/sim.hpp"

namespace backlab {

// One fully resolved experiment configuration.
struct Scenario {
    std::string name;
    BackoffSpec spec;
    int n = 10;
    RetryLimit retry_limit = RetryLimit::unlimited();
    PhyProfile phy;
    std::int64_t slots = 1'000'000;
    std::uint64_t seed = kDefaultSeed;
    int runs = 1;

    bool operator==(const Scenario&) const = default;
};

// Parses and validates the JSON scenario schema; unknown keys are rejected
// and defaults (w0 = 16, unlimited retries, 802.11g slot lengths) applied.
// Throws ConfigError with the offending field path.
Scenario scenario_from_json(const nlohmann::ordered_json& j);
Scenario load_config(const std::string& path);

// Emits every field, defaults included, so a scenario round-trips.
nlohmann::ordered_json scenario_to_json(const Scenario& s);

// Read-only named presets reproducing the standard experiment setups.
const std::vector<Scenario>& presets();
const Scenario& preset(const std::string& name);

// Floating-point formatting used by all reports: 6 significant digits.
std::string format_double(double v);
double round6(double v);

}  // namespace backlab
