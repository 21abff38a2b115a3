// Python bindings for the backlab core: spec construction, the fixed-point
// solver, the slotted simulator, delay-tail analysis and the empirical tail
// statistics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "backlab/backoff.hpp"
#include "backlab/errors.hpp"
#include "backlab/fixedpoint.hpp"
#include "backlab/moments.hpp"
#include "backlab/phy.hpp"
#include "backlab/scenario.hpp"
#include "backlab/sim.hpp"
#include "backlab/tailstats.hpp"

namespace py = pybind11;
using namespace backlab;

namespace {

RetryLimit to_retry_limit(const std::optional<int>& k) {
    return k.has_value() ? RetryLimit::at_most(*k) : RetryLimit::unlimited();
}

}  // namespace

PYBIND11_MODULE(_backlab, m) {
    m.doc() =
        "Saturation throughput, delay-tail classification and slotted "
        "simulation of backoff collision-resolution schemes";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError",
                                                  PyExc_ValueError);
    py::register_exception<ClassificationError>(m, "ClassificationError",
                                                PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);
    py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

    py::class_<BackoffSpec>(m, "BackoffSpec")
        .def_static("exponential", &BackoffSpec::exponential, py::arg("r"),
                    py::arg("w0") = 16)
        .def_static("sub_exponential", &BackoffSpec::sub_exponential,
                    py::arg("r"), py::arg("a"), py::arg("w0") = 16)
        .def_static("polynomial", &BackoffSpec::polynomial, py::arg("b"),
                    py::arg("w0") = 16)
        .def_static("custom_table", &BackoffSpec::custom_table,
                    py::arg("values"), py::arg("w0") = 16)
        .def_readonly("w0", &BackoffSpec::w0)
        .def("__repr__", [](const BackoffSpec& s) {
            switch (s.family) {
                case BackoffFamily::Exponential:
                    return "BackoffSpec.exponential(r=" + std::to_string(s.r) +
                           ", w0=" + std::to_string(s.w0) + ")";
                case BackoffFamily::SubExponential:
                    return "BackoffSpec.sub_exponential(r=" +
                           std::to_string(s.r) + ", a=" + std::to_string(s.a) +
                           ", w0=" + std::to_string(s.w0) + ")";
                case BackoffFamily::Polynomial:
                    return "BackoffSpec.polynomial(b=" + std::to_string(s.b) +
                           ", w0=" + std::to_string(s.w0) + ")";
                case BackoffFamily::Table:
                    return "BackoffSpec.custom_table(<" +
                           std::to_string(s.table.size()) +
                           " entries>, w0=" + std::to_string(s.w0) + ")";
            }
            return std::string("BackoffSpec()");
        });

    py::class_<PhyProfile>(m, "PhyProfile")
        .def(py::init<>())
        .def_static("equal_slots", &PhyProfile::equal_slots,
                    py::arg("slot_us") = 1.0)
        .def_static("ieee80211g", [] { return PhyProfile::ieee80211g(); })
        .def_readwrite("t_idle_us", &PhyProfile::t_idle_us)
        .def_readwrite("t_succ_us", &PhyProfile::t_succ_us)
        .def_readwrite("t_coll_us", &PhyProfile::t_coll_us);

    m.def("growth_factor", &growth_factor, py::arg("spec"), py::arg("k"));
    m.def(
        "window",
        [](const BackoffSpec& spec, int k) {
            const Window w = window(spec, k);
            return py::make_tuple(w.analytic, w.integer_window);
        },
        py::arg("spec"), py::arg("k"),
        "Returns (analytic, integer_window) for stage k");
    m.def(
        "gamma_limit",
        [](const BackoffSpec& spec) {
            const GammaEstimate g = gamma_limit(spec);
            return py::make_tuple(g.value, g.oscillating);
        },
        py::arg("spec"), "Returns (gamma, oscillating)");

    py::class_<FixedPointSolution>(m, "FixedPointSolution")
        .def_readonly("n", &FixedPointSolution::n)
        .def_readonly("tau", &FixedPointSolution::tau)
        .def_readonly("pc", &FixedPointSolution::pc)
        .def_readonly("throughput", &FixedPointSolution::throughput)
        .def_readonly("converged", &FixedPointSolution::converged)
        .def("__repr__", [](const FixedPointSolution& s) {
            return "FixedPointSolution(n=" + std::to_string(s.n) +
                   ", tau=" + std::to_string(s.tau) +
                   ", pc=" + std::to_string(s.pc) +
                   ", throughput=" + std::to_string(s.throughput) + ")";
        });

    m.def(
        "solve",
        [](const BackoffSpec& spec, int n, std::optional<int> retry_limit,
           std::optional<PhyProfile> phy) {
            return solve(spec, n, to_retry_limit(retry_limit),
                         phy.value_or(PhyProfile::ieee80211g()));
        },
        py::arg("spec"), py::arg("n"), py::arg("retry_limit") = py::none(),
        py::arg("phy") = py::none());
    m.def(
        "sweep",
        [](const BackoffSpec& spec, const std::vector<int>& n_values,
           std::optional<int> retry_limit, std::optional<PhyProfile> phy) {
            return sweep(spec, n_values, to_retry_limit(retry_limit),
                         phy.value_or(PhyProfile::ieee80211g()));
        },
        py::arg("spec"), py::arg("n_values"),
        py::arg("retry_limit") = py::none(), py::arg("phy") = py::none());
    m.def(
        "asymptotic_pc",
        [](const BackoffSpec& spec) {
            const AsymptoticPc a = asymptotic_pc(spec);
            return py::make_tuple(a.limit, a.stable, a.throughput_equal_slots);
        },
        py::arg("spec"), "Returns (pc_limit, stable, equal_slot_throughput)");

    m.def("powerlaw_slope", &powerlaw_slope, py::arg("spec"), py::arg("pc"));
    m.def(
        "countdown_moments",
        [](const BackoffSpec& spec, double pc) {
            const CountdownMoments cm = countdown_moments(spec, pc);
            return py::make_tuple(cm.mean, cm.variance);
        },
        py::arg("spec"), py::arg("pc"),
        "Returns (mean, variance); None marks a divergent moment");
    m.def(
        "moment_finite",
        [](const BackoffSpec& spec, double pc, int order) {
            const MomentReport r = moment_finite(spec, pc, order);
            return py::make_tuple(r.finite, r.criterion, r.value);
        },
        py::arg("spec"), py::arg("pc"), py::arg("order"),
        "Returns (finite, criterion, value_or_None)");
    m.def(
        "classify_tail",
        [](const BackoffSpec& spec, double pc) {
            const TailClass t = classify_tail(spec, pc);
            return py::make_tuple(tail_region_name(t.region), t.alpha);
        },
        py::arg("spec"), py::arg("pc"), "Returns (region, alpha_or_None)");
    m.def(
        "lambda_pmf",
        [](const BackoffSpec& spec, double pc, int n_max) {
            const CountdownPmf pmf = lambda_pmf(spec, pc, n_max);
            return py::make_tuple(pmf.p, pmf.truncation_mass,
                                  pmf.underresolved);
        },
        py::arg("spec"), py::arg("pc"), py::arg("n_max"),
        "Returns (p, truncation_mass, underresolved)");
    m.def(
        "lighttail_fit",
        [](const BackoffSpec& spec, double pc, int n_max) {
            const LightTailFit fit = lighttail_fit(lambda_pmf(spec, pc, n_max));
            return py::make_tuple(fit.lambda0, fit.r_squared);
        },
        py::arg("spec"), py::arg("pc"), py::arg("n_max"),
        "Returns (lambda0, r_squared) of the upper-half log-pmf fit");
    m.def("lerch_phi", &lerch_phi, py::arg("z"), py::arg("s"), py::arg("v"),
          py::arg("tol") = 1e-12);
    m.def("pb_moment_lower_bound", &pb_moment_lower_bound, py::arg("b"),
          py::arg("w0"), py::arg("pc"), py::arg("order"));

    py::class_<StageStats>(m, "StageStats")
        .def_readonly("stage", &StageStats::stage)
        .def_readonly("attempts", &StageStats::attempts)
        .def_readonly("collisions", &StageStats::collisions)
        .def_readonly("pc", &StageStats::pc);

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("sim_time_us", &SimResult::sim_time_us)
        .def_readonly("successes", &SimResult::successes)
        .def_readonly("collisions", &SimResult::collisions)
        .def_readonly("idle_slots", &SimResult::idle_slots)
        .def_readonly("throughput", &SimResult::throughput)
        .def_readonly("pc_overall", &SimResult::pc_overall)
        .def_readonly("pc_by_stage", &SimResult::pc_by_stage)
        .def_readonly("delay_samples_us", &SimResult::delay_samples_us)
        .def_readonly("dropped_packets", &SimResult::dropped_packets)
        .def_readonly("loss_rate", &SimResult::loss_rate)
        .def_readonly("per_node_successes", &SimResult::per_node_successes)
        .def_readonly("seed_used", &SimResult::seed_used)
        .def_readonly("stage_cap_hits", &SimResult::stage_cap_hits);

    m.def(
        "simulate",
        [](const BackoffSpec& spec, int n, std::int64_t slots,
           std::uint64_t seed, std::optional<int> retry_limit,
           std::optional<PhyProfile> phy, int max_stage_cap) {
            SimConfig config;
            config.n = n;
            config.spec = spec;
            config.retry_limit = to_retry_limit(retry_limit);
            config.phy = phy.value_or(PhyProfile::ieee80211g());
            config.total_slots = slots;
            config.seed = seed;
            config.max_stage_cap = max_stage_cap;
            return run(config);
        },
        py::arg("spec"), py::arg("n"), py::arg("slots") = 1'000'000,
        py::arg("seed") = kDefaultSeed, py::arg("retry_limit") = py::none(),
        py::arg("phy") = py::none(), py::arg("max_stage_cap") = 64);

    m.def(
        "ccdf",
        [](const std::vector<double>& samples) {
            std::vector<std::pair<double, double>> out;
            for (const CcdfPoint& p : ccdf(samples)) {
                out.emplace_back(p.x, p.tail_prob);
            }
            return out;
        },
        py::arg("samples"));
    m.def(
        "loglog_slope",
        [](const std::vector<double>& samples, double tail_fraction) {
            const TailFit fit = loglog_slope(samples, tail_fraction);
            return py::make_tuple(fit.alpha_hat, fit.r_squared.value_or(0.0));
        },
        py::arg("samples"), py::arg("tail_fraction") = 0.1,
        "Returns (alpha_hat, r_squared)");
    m.def(
        "hill_estimate",
        [](const std::vector<double>& samples, int k) {
            return hill_estimate(samples, k).alpha_hat;
        },
        py::arg("samples"), py::arg("k") = 0);
    m.def(
        "variance_growth",
        [](const std::vector<double>& samples, int windows) {
            const VarianceGrowth g = variance_growth(samples, windows);
            std::vector<std::pair<std::int64_t, double>> checkpoints;
            for (const auto& cp : g.checkpoints) {
                checkpoints.emplace_back(cp.n_used, cp.running_variance);
            }
            return py::make_tuple(checkpoints, g.divergence_suspected);
        },
        py::arg("samples"), py::arg("windows") = 10,
        "Returns ([(n_used, variance)], divergence_suspected)");
    m.def(
        "fairness",
        [](const std::vector<std::int64_t>& per_node, double threshold) {
            const FairnessReport r = fairness(per_node, threshold);
            return py::make_tuple(r.jain_index, r.starved_fraction, r.mean);
        },
        py::arg("per_node"), py::arg("starvation_threshold") = 0.1,
        "Returns (jain_or_None, starved_fraction, mean)");

    m.attr("DEFAULT_SEED") = kDefaultSeed;
}
