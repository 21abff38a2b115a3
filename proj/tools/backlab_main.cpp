// backlab command line: analytic fixed-point solutions, slotted simulation,
// tail classification and statistics for backoff collision-resolution
// schemes in saturated random-access networks.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "backlab/backoff.hpp"
#include "backlab/errors.hpp"
#include "backlab/fixedpoint.hpp"
#include "backlab/moments.hpp"
#include "backlab/scenario.hpp"
#include "backlab/sim.hpp"
#include "backlab/tailstats.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitNoConvergence = 3;

struct GlobalOptions {
    std::string config_path;
    std::string output_path;
    std::string format;  // empty: the subcommand's native format
    std::optional<std::uint64_t> seed;
};

void write_output(const GlobalOptions& opts, const std::string& text) {
    if (opts.output_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') {
            std::cout << '\n';
        }
        return;
    }
    std::ofstream out(opts.output_path);
    if (!out) {
        throw backlab::ConfigError("cannot open output file: " +
                                   opts.output_path);
    }
    out << text;
    if (!text.empty() && text.back() != '\n') {
        out << '\n';
    }
}

backlab::Scenario resolve_scenario(const GlobalOptions& opts) {
    if (opts.config_path.empty()) {
        throw backlab::ConfigError("no --config file given");
    }
    backlab::Scenario s = backlab::load_config(opts.config_path);
    if (opts.seed.has_value()) {
        s.seed = *opts.seed;
    }
    return s;
}

ordered_json solution_json(const backlab::FixedPointSolution& sol) {
    return ordered_json{{"n", sol.n},
                        {"tau", backlab::round6(sol.tau)},
                        {"pc", backlab::round6(sol.pc)},
                        {"throughput", backlab::round6(sol.throughput)},
                        {"converged", sol.converged}};
}

ordered_json sim_summary_json(const backlab::SimResult& r) {
    ordered_json j{{"sim_time_us", backlab::round6(r.sim_time_us)},
                   {"successes", r.successes},
                   {"collisions", r.collisions},
                   {"idle_slots", r.idle_slots},
                   {"throughput", backlab::round6(r.throughput)},
                   {"pc_overall", backlab::round6(r.pc_overall)},
                   {"delay_samples", r.delay_samples_us.size()},
                   {"dropped_packets", r.dropped_packets},
                   {"loss_rate", backlab::round6(r.loss_rate)},
                   {"stage_cap_hits", r.stage_cap_hits},
                   {"seed", r.seed_used},
                   {"generator", r.generator}};
    return j;
}

std::vector<double> read_delay_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw backlab::ConfigError("cannot open delay file: " + path);
    }
    std::vector<double> delays;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        delays.push_back(std::stod(line));
    }
    return delays;
}

std::vector<int> parse_n_range(const std::string& text) {
    // start:stop:step, inclusive of stop when the step lands on it
    int start = 0, stop = 0, step = 1;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step < 1 || start < 1 || stop < start) {
        throw backlab::ConfigError(
            "--n-range expects start:stop:step with 1 <= start <= stop");
    }
    std::vector<int> values;
    for (int n = start; n <= stop; n += step) {
        values.push_back(n);
    }
    return values;
}

int run_cli(int argc, char** argv) {
    CLI::App app{
        "Backoff collision-resolution analysis: fixed-point throughput, "
        "delay-tail classification and slotted simulation"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions opts;
    app.add_option("--config", opts.config_path,
                   "Scenario JSON (see README for the schema)");
    app.add_option("--output", opts.output_path,
                   "Write the report here instead of stdout");
    app.add_option("--format", opts.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
    std::uint64_t seed_flag = 0;
    auto* seed_opt =
        app.add_option("--seed", seed_flag, "Override the scenario seed");

    // solve
    auto* solve_cmd =
        app.add_subcommand("solve", "Solve the (tau, pc) fixed point");
    int solve_n = 0;
    std::string solve_retry;
    solve_cmd->add_option("--n", solve_n, "Network size override");
    solve_cmd->add_option("--retry-limit", solve_retry,
                          "Retry limit override: integer or 'inf'");

    // sweep
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Fixed-point solutions over an N range");
    std::string n_range = "10:100:10";
    sweep_cmd->add_option("--n-range", n_range, "start:stop:step (inclusive)");

    // simulate
    auto* sim_cmd =
        app.add_subcommand("simulate", "Run the slotted simulator");
    std::int64_t sim_slots = 0;
    int sim_runs = 0;
    std::string dump_delays, dump_stages, dump_nodes;
    sim_cmd->add_option("--slots", sim_slots, "Slot count override");
    sim_cmd->add_option("--runs", sim_runs, "Run count override");
    sim_cmd->add_option("--dump-delays", dump_delays,
                        "Write delay samples (us), one per line");
    sim_cmd->add_option("--dump-stages", dump_stages,
                        "Write per-stage CSV: stage,attempts,collisions,pc");
    sim_cmd->add_option("--dump-nodes", dump_nodes,
                        "Write per-node CSV: node,successes");

    // classify
    auto* classify_cmd = app.add_subcommand(
        "classify", "Tail classification and moment finiteness");
    double classify_pc = 0.5;
    classify_cmd->add_option("--pc", classify_pc,
                             "Collision probability to classify at")
        ->check(CLI::Range(0.0, 1.0));

    // pmf
    auto* pmf_cmd = app.add_subcommand(
        "pmf", "Countdown pmf with a light-tail regression footer");
    int pmf_n_max = 2048;
    double pmf_pc = 0.5;
    pmf_cmd->add_option("--n-max", pmf_n_max, "Largest countdown value");
    pmf_cmd->add_option("--pc", pmf_pc, "Collision probability")
        ->check(CLI::Range(0.0, 1.0));

    // tail
    auto* tail_cmd =
        app.add_subcommand("tail", "Tail statistics over a delay dump");
    std::string tail_delays;
    double tail_fraction = 0.1;
    int hill_k = 0;
    tail_cmd->add_option("--delays", tail_delays, "Delay file, one us per line")
        ->required();
    tail_cmd->add_option("--tail-fraction", tail_fraction,
                         "Top fraction fitted by the log-log slope");
    tail_cmd->add_option("--hill-k", hill_k,
                         "Hill order-statistic count (default sqrt(n))");

    // preset
    auto* preset_cmd = app.add_subcommand("preset", "Named scenario presets");
    auto* preset_list = preset_cmd->add_subcommand("list", "List presets");
    auto* preset_run = preset_cmd->add_subcommand(
        "run", "Solve + simulate a preset and report both");
    std::string preset_name;
    preset_run->add_option("name", preset_name, "Preset name")->required();
    preset_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) {
        opts.seed = seed_flag;
    }

    if (solve_cmd->parsed()) {
        backlab::Scenario s = resolve_scenario(opts);
        if (solve_n > 0) {
            s.n = solve_n;
        }
        if (!solve_retry.empty()) {
            if (solve_retry == "inf") {
                s.retry_limit = backlab::RetryLimit::unlimited();
            } else {
                try {
                    s.retry_limit =
                        backlab::RetryLimit::at_most(std::stoi(solve_retry));
                } catch (const std::exception&) {
                    throw backlab::ConfigError(
                        "--retry-limit expects an integer or 'inf', got '" +
                        solve_retry + "'");
                }
            }
        }
        const auto sol = backlab::solve(s.spec, s.n, s.retry_limit, s.phy);
        if (opts.format == "csv") {
            std::ostringstream csv;
            csv << "n,tau,pc,throughput,converged\n";
            csv << sol.n << ',' << backlab::format_double(sol.tau) << ','
                << backlab::format_double(sol.pc) << ','
                << backlab::format_double(sol.throughput) << ','
                << (sol.converged ? "true" : "false") << '\n';
            write_output(opts, csv.str());
        } else {
            write_output(opts, solution_json(sol).dump(2));
        }
        return sol.converged ? kExitOk : kExitNoConvergence;
    }

    if (sweep_cmd->parsed()) {
        backlab::Scenario s = resolve_scenario(opts);
        const std::vector<int> n_values = parse_n_range(n_range);
        const auto sols =
            backlab::sweep(s.spec, n_values, s.retry_limit, s.phy);
        bool all_converged = true;
        if (opts.format == "json") {
            ordered_json arr = ordered_json::array();
            for (const auto& sol : sols) {
                arr.push_back(solution_json(sol));
                all_converged = all_converged && sol.converged;
            }
            write_output(opts, arr.dump(2));
        } else {
            std::ostringstream csv;
            csv << "n,tau,pc,throughput\n";
            for (const auto& sol : sols) {
                csv << sol.n << ',' << backlab::format_double(sol.tau) << ','
                    << backlab::format_double(sol.pc) << ','
                    << backlab::format_double(sol.throughput) << '\n';
                all_converged = all_converged && sol.converged;
            }
            write_output(opts, csv.str());
        }
        return all_converged ? kExitOk : kExitNoConvergence;
    }

    if (sim_cmd->parsed()) {
        backlab::Scenario s = resolve_scenario(opts);
        if (sim_slots > 0) {
            s.slots = sim_slots;
        }
        if (sim_runs > 0) {
            s.runs = sim_runs;
        }
        backlab::SimConfig config;
        config.n = s.n;
        config.spec = s.spec;
        config.retry_limit = s.retry_limit;
        config.phy = s.phy;
        config.total_slots = s.slots;
        config.seed = s.seed;
        const auto results = backlab::replicate(config, s.runs);

        ordered_json report = ordered_json::array();
        for (const auto& r : results) {
            report.push_back(sim_summary_json(r));
        }
        write_output(opts, report.dump(2));

        if (!dump_delays.empty()) {
            std::ofstream out(dump_delays);
            for (const auto& r : results) {
                for (const double d : r.delay_samples_us) {
                    out << d << '\n';
                }
            }
        }
        if (!dump_stages.empty()) {
            std::ofstream out(dump_stages);
            out << "stage,attempts,collisions,pc\n";
            for (std::size_t i = 0; i < results.size(); ++i) {
                for (const auto& st : results[i].pc_by_stage) {
                    out << st.stage << ',' << st.attempts << ','
                        << st.collisions << ','
                        << backlab::format_double(st.pc) << '\n';
                }
            }
        }
        if (!dump_nodes.empty()) {
            std::ofstream out(dump_nodes);
            out << "node,successes\n";
            for (const auto& r : results) {
                for (std::size_t node = 0; node < r.per_node_successes.size();
                     ++node) {
                    out << node << ',' << r.per_node_successes[node] << '\n';
                }
            }
        }
        return kExitOk;
    }

    if (classify_cmd->parsed()) {
        backlab::Scenario s = resolve_scenario(opts);
        const auto gamma = backlab::gamma_limit(s.spec);
        const auto tail = backlab::classify_tail(s.spec, classify_pc);
        ordered_json j{{"gamma", backlab::round6(gamma.value)},
                       {"region", backlab::tail_region_name(tail.region)}};
        if (tail.alpha.has_value()) {
            j["alpha"] = backlab::round6(*tail.alpha);
        }
        ordered_json moments = ordered_json::array();
        for (int order = 1; order <= 4; ++order) {
            const auto report =
                backlab::moment_finite(s.spec, classify_pc, order);
            moments.push_back(
                ordered_json{{"n", report.order},
                             {"finite", report.finite},
                             {"criterion", backlab::round6(report.criterion)}});
        }
        j["moment_table"] = moments;
        write_output(opts, j.dump(2));
        return kExitOk;
    }

    if (pmf_cmd->parsed()) {
        backlab::Scenario s = resolve_scenario(opts);
        const auto pmf = backlab::lambda_pmf(s.spec, pmf_pc, pmf_n_max);
        std::ostringstream csv;
        csv << "n,p\n";
        for (std::size_t n = 0; n < pmf.p.size(); ++n) {
            csv << n << ',' << backlab::format_double(pmf.p[n]) << '\n';
        }
        const auto fit = backlab::lighttail_fit(pmf);
        ordered_json footer{
            {"lambda0", backlab::round6(fit.lambda0)},
            {"r_squared", backlab::round6(fit.r_squared)},
            {"truncation_mass", backlab::round6(pmf.truncation_mass)}};
        csv << footer.dump() << '\n';
        write_output(opts, csv.str());
        return kExitOk;
    }

    if (tail_cmd->parsed()) {
        const std::vector<double> delays = read_delay_file(tail_delays);
        const auto loglog = backlab::loglog_slope(delays, tail_fraction);
        const auto growth = backlab::variance_growth(delays);
        ordered_json j{
            {"loglog",
             {{"alpha", backlab::round6(loglog.alpha_hat)},
              {"r2", backlab::round6(loglog.r_squared.value_or(0.0))}}}};
        try {
            const auto hill = backlab::hill_estimate(delays, hill_k);
            j["hill"] = {{"alpha", backlab::round6(hill.alpha_hat)}};
        } catch (const backlab::FitError& e) {
            j["hill"] = {{"error", e.what()}};
        }
        ordered_json checkpoints = ordered_json::array();
        for (const auto& cp : growth.checkpoints) {
            checkpoints.push_back(
                ordered_json{{"n_used", cp.n_used},
                             {"variance", backlab::round6(cp.running_variance)}});
        }
        j["variance_growth"] = checkpoints;
        j["diagnosis"] = growth.divergence_suspected ? "divergence-suspected"
                                                     : "no-divergence-detected";
        write_output(opts, j.dump(2));
        return kExitOk;
    }

    if (preset_list->parsed()) {
        ordered_json j = ordered_json::array();
        for (const auto& p : backlab::presets()) {
            j.push_back(backlab::scenario_to_json(p));
        }
        write_output(opts, j.dump(2));
        return kExitOk;
    }

    if (preset_run->parsed()) {
        backlab::Scenario s = backlab::preset(preset_name);
        if (opts.seed.has_value()) {
            s.seed = *opts.seed;
        }
        const auto sol = backlab::solve(s.spec, s.n, s.retry_limit, s.phy);
        backlab::SimConfig config;
        config.n = s.n;
        config.spec = s.spec;
        config.retry_limit = s.retry_limit;
        config.phy = s.phy;
        config.total_slots = s.slots;
        config.seed = s.seed;
        const auto results = backlab::replicate(config, s.runs);
        ordered_json sims = ordered_json::array();
        for (const auto& r : results) {
            sims.push_back(sim_summary_json(r));
        }
        ordered_json j{{"preset", s.name},
                       {"analytic", solution_json(sol)},
                       {"simulated", sims}};
        write_output(opts, j.dump(2));
        return sol.converged ? kExitOk : kExitNoConvergence;
    }

    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const backlab::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const backlab::ModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
