#include "backlab/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "backlab/errors.hpp"

namespace backlab {

namespace {

using json = nlohmann::ordered_json;

const std::set<std::string> kTopLevelKeys = {
    "name", "family", "r",     "a",    "b",    "values",
    "w0",   "n",      "retry_limit", "slots", "seed", "runs", "phy"};
const std::set<std::string> kPhyKeys = {"t_idle", "t_succ", "t_coll"};

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError("config error at " + path + ": " + message);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        if (!known.contains(key)) {
            fail(path + "." + key, "unknown key");
        }
    }
}

double require_number(const json& obj, const std::string& key,
                      const std::string& path) {
    if (!obj.contains(key)) {
        fail(path + "." + key, "missing required key");
    }
    if (!obj[key].is_number()) {
        fail(path + "." + key, "expected a number");
    }
    return obj[key].get<double>();
}

std::int64_t optional_integer(const json& obj, const std::string& key,
                              std::int64_t fallback, const std::string& path) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj[key].is_number_integer()) {
        fail(path + "." + key, "expected an integer");
    }
    return obj[key].get<std::int64_t>();
}

void forbid(const json& obj, const std::string& key, const std::string& family,
            const std::string& path) {
    if (obj.contains(key)) {
        fail(path + "." + key, "not a parameter of family '" + family + "'");
    }
}

BackoffSpec spec_from_json(const json& j, const std::string& path) {
    if (!j.contains("family")) {
        fail(path + ".family", "missing required key");
    }
    if (!j["family"].is_string()) {
        fail(path + ".family", "expected one of \"eb\", \"seb\", \"pb\", \"table\"");
    }
    const std::string family = j["family"].get<std::string>();
    const int w0 =
        static_cast<int>(optional_integer(j, "w0", 16, path));
    try {
        if (family == "eb") {
            forbid(j, "a", family, path);
            forbid(j, "b", family, path);
            forbid(j, "values", family, path);
            return BackoffSpec::exponential(require_number(j, "r", path), w0);
        }
        if (family == "seb") {
            forbid(j, "b", family, path);
            forbid(j, "values", family, path);
            return BackoffSpec::sub_exponential(require_number(j, "r", path),
                                                require_number(j, "a", path),
                                                w0);
        }
        if (family == "pb") {
            forbid(j, "r", family, path);
            forbid(j, "a", family, path);
            forbid(j, "values", family, path);
            return BackoffSpec::polynomial(require_number(j, "b", path), w0);
        }
        if (family == "table") {
            forbid(j, "r", family, path);
            forbid(j, "a", family, path);
            forbid(j, "b", family, path);
            if (!j.contains("values") || !j["values"].is_array()) {
                fail(path + ".values", "expected an array of growth factors");
            }
            std::vector<double> values;
            for (const auto& v : j["values"]) {
                if (!v.is_number()) {
                    fail(path + ".values", "entries must be numbers");
                }
                values.push_back(v.get<double>());
            }
            return BackoffSpec::custom_table(std::move(values), w0);
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + ".family", "unknown family '" + family + "'");
}

}  // namespace

Scenario scenario_from_json(const nlohmann::ordered_json& j) {
    const std::string path = "$";
    if (!j.is_object()) {
        fail(path, "expected a JSON object");
    }
    reject_unknown_keys(j, kTopLevelKeys, path);

    Scenario s;
    if (j.contains("name")) {
        if (!j["name"].is_string()) {
            fail(path + ".name", "expected a string");
        }
        s.name = j["name"].get<std::string>();
    }
    s.spec = spec_from_json(j, path);

    const std::int64_t n = optional_integer(j, "n", 10, path);
    if (n < 1) {
        fail(path + ".n", "network size must be at least 1");
    }
    s.n = static_cast<int>(n);

    if (j.contains("retry_limit")) {
        const auto& rl = j["retry_limit"];
        if (rl.is_string()) {
            if (rl.get<std::string>() != "inf") {
                fail(path + ".retry_limit", "expected an integer or \"inf\"");
            }
            s.retry_limit = RetryLimit::unlimited();
        } else if (rl.is_number_integer()) {
            const std::int64_t k = rl.get<std::int64_t>();
            if (k < 0 || k > 1'000'000) {
                fail(path + ".retry_limit", "must lie in [0, 1e6] or be \"inf\"");
            }
            s.retry_limit = RetryLimit::at_most(static_cast<int>(k));
        } else {
            fail(path + ".retry_limit", "expected an integer or \"inf\"");
        }
    }

    const std::int64_t slots = optional_integer(j, "slots", 1'000'000, path);
    if (slots < 1) {
        fail(path + ".slots", "must be at least 1");
    }
    s.slots = slots;

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
            fail(path + ".seed", "expected an unsigned integer");
        }
        s.seed = j["seed"].get<std::uint64_t>();
    }

    const std::int64_t runs = optional_integer(j, "runs", 1, path);
    if (runs < 1 || runs > 10'000) {
        fail(path + ".runs", "must lie in [1, 10000]");
    }
    s.runs = static_cast<int>(runs);

    if (j.contains("phy")) {
        const auto& p = j["phy"];
        if (!p.is_object()) {
            fail(path + ".phy", "expected an object");
        }
        reject_unknown_keys(p, kPhyKeys, path + ".phy");
        PhyProfile phy;
        phy.t_idle_us = require_number(p, "t_idle", path + ".phy");
        phy.t_succ_us = require_number(p, "t_succ", path + ".phy");
        phy.t_coll_us = require_number(p, "t_coll", path + ".phy");
        try {
            validate(phy);
        } catch (const std::invalid_argument& e) {
            fail(path + ".phy", e.what());
        }
        s.phy = phy;
    } else {
        s.phy = PhyProfile::ieee80211g();
    }
    return s;
}

Scenario load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
    json j;
    if (!s.name.empty()) {
        j["name"] = s.name;
    }
    switch (s.spec.family) {
        case BackoffFamily::Exponential:
            j["family"] = "eb";
            j["r"] = s.spec.r;
            break;
        case BackoffFamily::SubExponential:
            j["family"] = "seb";
            j["r"] = s.spec.r;
            j["a"] = s.spec.a;
            break;
        case BackoffFamily::Polynomial:
            j["family"] = "pb";
            j["b"] = s.spec.b;
            break;
        case BackoffFamily::Table:
            j["family"] = "table";
            j["values"] = s.spec.table;
            break;
    }
    j["w0"] = s.spec.w0;
    j["n"] = s.n;
    if (s.retry_limit.is_unlimited()) {
        j["retry_limit"] = "inf";
    } else {
        j["retry_limit"] = s.retry_limit.value();
    }
    j["slots"] = s.slots;
    j["seed"] = s.seed;
    j["runs"] = s.runs;
    j["phy"] = {{"t_idle", s.phy.t_idle_us},
                {"t_succ", s.phy.t_succ_us},
                {"t_coll", s.phy.t_coll_us}};
    return j;
}

const std::vector<Scenario>& presets() {
    static const std::vector<Scenario> list = [] {
        std::vector<Scenario> v;
        const PhyProfile phy = PhyProfile::ieee80211g();
        const auto add = [&](std::string name, BackoffSpec spec, int n,
                             RetryLimit rl, std::int64_t slots, int runs) {
            Scenario s;
            s.name = std::move(name);
            s.spec = std::move(spec);
            s.n = n;
            s.retry_limit = rl;
            s.phy = phy;
            s.slots = slots;
            s.seed = kDefaultSeed;
            s.runs = runs;
            v.push_back(std::move(s));
        };
        const auto inf = RetryLimit::unlimited();

        // Starvation demo: 10-node BEB WLAN, no retry limit.
        add("fig1-beb", BackoffSpec::exponential(2.0), 10, inf, 1'000'000, 1);

        // Per-stage collision probabilities, W0 = 32.
        add("fig3-eb", BackoffSpec::exponential(2.0, 32), 10, inf, 1'000'000, 1);
        add("fig3-seb", BackoffSpec::sub_exponential(4.0, 0.7, 32), 10, inf,
            1'000'000, 1);
        add("fig3-pb", BackoffSpec::polynomial(3.0, 32), 10, inf, 1'000'000, 1);

        // Throughput / delay-variance comparison, no retry limit.
        add("fig5-eb", BackoffSpec::exponential(2.0), 20, inf, 1'000'000, 3);
        add("fig5-seb", BackoffSpec::sub_exponential(4.0, 0.7), 20, inf,
            1'000'000, 3);
        add("fig5-pb", BackoffSpec::polynomial(3.0), 20, inf, 1'000'000, 3);

        // Loss-rate comparison at retry limit 5 in a 50-node network.
        const auto k5 = RetryLimit::at_most(5);
        add("fig6-eb", BackoffSpec::exponential(2.0), 50, k5, 1'000'000, 1);
        add("fig6-seb", BackoffSpec::sub_exponential(4.0, 0.7), 50, k5,
            1'000'000, 1);
        add("fig6-pb", BackoffSpec::polynomial(3.0), 50, k5, 1'000'000, 1);

        // Fairness histogram: 100 nodes, averaged runs.
        add("fig7-eb", BackoffSpec::exponential(2.0), 100, inf, 1'000'000, 5);
        add("fig7-seb", BackoffSpec::sub_exponential(4.0, 0.7), 100, inf,
            1'000'000, 5);
        add("fig7-pb", BackoffSpec::polynomial(3.0), 100, inf, 1'000'000, 5);

        // Saturation-throughput sweeps up to 1200 nodes (analytic).
        add("fig8-beb", BackoffSpec::exponential(2.0), 1200, inf, 1'000'000, 1);
        add("fig8-pb-b3", BackoffSpec::polynomial(3.0), 1200, inf, 1'000'000, 1);
        add("fig8-pb-b5", BackoffSpec::polynomial(5.0), 1200, inf, 1'000'000, 1);
        add("fig8-pb-b7", BackoffSpec::polynomial(7.0), 1200, inf, 1'000'000, 1);

        // Countdown pmf tail regressions.
        add("fig10-pb-b05", BackoffSpec::polynomial(0.5), 10, inf, 1'000'000, 1);
        add("fig10-pb-b08", BackoffSpec::polynomial(0.8), 10, inf, 1'000'000, 1);
        add("fig10-pb-b10", BackoffSpec::polynomial(1.0), 10, inf, 1'000'000, 1);
        add("fig10-eb", BackoffSpec::exponential(2.0), 10, inf, 1'000'000, 1);
        return v;
    }();
    return list;
}

const Scenario& preset(const std::string& name) {
    for (const auto& s : presets()) {
        if (s.name == name) {
            return s;
        }
    }
    throw ConfigError("unknown preset '" + name + "'");
}

double round6(double v) {
    if (v == 0.0 || !std::isfinite(v)) {
        return v;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::strtod(buf, nullptr);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace backlab
