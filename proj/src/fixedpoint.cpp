#include "backlab/fixedpoint.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "backlab/errors.hpp"

namespace backlab {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr double kSeriesRelTol = 1e-12;
constexpr int kSeriesMinTerms = 32;
constexpr int kSeriesDivergenceRun = 64;
constexpr long kSeriesMaxTerms = 10'000'000;

// Attempt rate implied by the mean backoff series at collision probability
// pc. A divergent series means windows outgrow the retry chain entirely, so
// the attempt rate collapses to zero.
double attempt_rate(const BackoffSpec& spec, double pc, RetryLimit retry_limit,
                    int* terms_out) {
    const BackoffSeries series = mean_backoff_series(spec, pc, retry_limit);
    if (terms_out != nullptr) {
        *terms_out = series.terms;
    }
    if (series.diverged || !std::isfinite(series.sum)) {
        return 0.0;
    }
    double attempts_norm;  // sum_{k=0}^{K} pc^k
    if (retry_limit.is_unlimited()) {
        attempts_norm = 1.0 / (1.0 - pc);
    } else if (pc == 0.0) {
        attempts_norm = 1.0;
    } else {
        attempts_norm =
            (1.0 - std::pow(pc, retry_limit.value() + 1)) / (1.0 - pc);
    }
    return attempts_norm / (attempts_norm + series.sum);
}

}  // namespace

SlotProbabilities slot_probabilities(double tau, int n) {
    if (n < 1) {
        throw std::invalid_argument("network size must be at least 1");
    }
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw std::invalid_argument("attempt rate must lie in [0, 1]");
    }
    const double idle = std::pow(1.0 - tau, n);
    const double success = n * tau * std::pow(1.0 - tau, n - 1);
    double collision = 1.0 - idle - success;
    if (collision < 0.0) {
        collision = 0.0;  // rounding guard near tau = 0 or n = 1
    }
    return {idle, success, collision};
}

BackoffSeries mean_backoff_series(const BackoffSpec& spec, double pc,
                                  RetryLimit retry_limit) {
    if (!(pc >= 0.0 && pc < 1.0)) {
        throw std::invalid_argument("collision probability must lie in [0, 1)");
    }
    const double w_first = growth_factor(spec, 0) * spec.w0;
    if (pc == 0.0) {
        return {0.5 * (w_first - 1.0), 1, false};  // only k = 0 survives
    }
    const bool unlimited = retry_limit.is_unlimited();
    const long last_term =
        unlimited ? kSeriesMaxTerms : static_cast<long>(retry_limit.value());

    // term_k = pc^k (W_k - 1)/2 built from x_k = pc^k W_k and y_k = pc^k.
    // Only ratios of g enter the update, so W_k never overflows here.
    double x = w_first;
    double y = 1.0;
    double sum = 0.0;
    double prev_term = std::numeric_limits<double>::infinity();
    int nondecreasing_run = 0;
    long k = 0;
    const long table_last =
        spec.family == BackoffFamily::Table
            ? static_cast<long>(spec.table.size()) - 1
            : std::numeric_limits<long>::max();

    while (true) {
        const double term = 0.5 * (x - y);
        if (!std::isfinite(term)) {
            return {sum, static_cast<int>(k), true};
        }
        sum += term;

        if (k >= last_term) {
            return {sum, static_cast<int>(k + 1), false};
        }
        if (unlimited) {
            if (term >= prev_term) {
                if (++nondecreasing_run >= kSeriesDivergenceRun) {
                    return {sum, static_cast<int>(k + 1), true};
                }
            } else {
                nondecreasing_run = 0;
            }
            if (k + 1 >= kSeriesMinTerms && term < kSeriesRelTol * sum) {
                return {sum, static_cast<int>(k + 1), false};
            }
            prev_term = term;
        } else if (term == 0.0 && y == 0.0) {
            // pc^k underflowed; the remaining finite-K terms are all zero.
            return {sum, static_cast<int>(k + 1), false};
        }

        if (k >= table_last) {
            if (term < kSeriesRelTol * sum) {
                return {sum, static_cast<int>(k + 1), false};
            }
            throw InsufficientDataError(
                "backoff table ends at stage " + std::to_string(table_last) +
                " before the series settles; extend the table");
        }

        const double ratio = growth_ratio(spec, static_cast<int>(k));
        x *= pc * ratio;
        y *= pc;
        ++k;
    }
}

FixedPointSolution solve(const BackoffSpec& spec, int n,
                         RetryLimit retry_limit, const PhyProfile& phy) {
    if (n < 1) {
        throw std::invalid_argument("network size must be at least 1");
    }
    FixedPointSolution sol;
    sol.n = n;

    const auto residual = [&](double pc) {
        const double theta = attempt_rate(spec, pc, retry_limit, nullptr);
        const double psi = 1.0 - std::pow(1.0 - theta, n - 1);
        return pc - psi;
    };

    double pc;
    if (n == 1) {
        pc = 0.0;  // a single node never collides
    } else {
        double lo = 0.0;
        double hi = 1.0 - 1e-9;
        const double h_lo = residual(lo);
        const double h_hi = residual(hi);
        if (h_lo > kResidualTol) {
            throw ModelError(
                "fixed point not bracketed: h(0) = " + std::to_string(h_lo) +
                "; the backoff function is not usable in the decoupled model");
        }
        if (h_hi < 0.0) {
            // The root sits beyond the search cap: windows too small for the
            // contention level and essentially every attempt collides. The
            // boundary solution describes that jam; converged reports
            // whether the residual still met the tolerance.
            pc = hi;
        } else {
            // h is strictly increasing, so plain bisection converges; stop
            // on a small residual or once the interval is at rounding width.
            for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
                const double mid = 0.5 * (lo + hi);
                const double h_mid = residual(mid);
                if (std::abs(h_mid) < kResidualTol) {
                    lo = hi = mid;
                    break;
                }
                if (h_mid > 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            pc = 0.5 * (lo + hi);
        }
    }

    sol.pc = pc;
    sol.tau = attempt_rate(spec, pc, retry_limit, &sol.series_terms_used);
    sol.converged = std::abs(residual(pc)) < kResidualTol;
    sol.throughput = throughput(sol, phy);
    return sol;
}

double throughput(const FixedPointSolution& sol, const PhyProfile& phy) {
    const SlotProbabilities p = slot_probabilities(sol.tau, sol.n);
    const double busy = p.idle * phy.t_idle_us + p.success * phy.t_succ_us +
                        p.collision * phy.t_coll_us;
    return p.success * phy.t_succ_us / busy;
}

AsymptoticPc asymptotic_pc(const BackoffSpec& spec) {
    const GrowthClass cls = growth_class(spec);
    if (cls.at_least_exponential) {
        const double limit = 1.0 / cls.gamma;
        const double s = std::log(1.0 / (1.0 - limit)) * (1.0 - limit);
        return {limit, true, s};
    }
    // Sub-exponential growth: pc climbs to 1 and the equal-slot throughput
    // ln(1/(1-pc)) (1-pc) collapses to zero.
    return {1.0, false, 0.0};
}

std::vector<FixedPointSolution> sweep(const BackoffSpec& spec,
                                      std::span<const int> n_values,
                                      RetryLimit retry_limit,
                                      const PhyProfile& phy) {
    if (n_values.empty()) {
        throw std::invalid_argument("sweep needs at least one network size");
    }
    std::vector<FixedPointSolution> out;
    out.reserve(n_values.size());
    const auto failed_entry = [](int n) {
        FixedPointSolution failed;
        failed.n = n;
        failed.tau = std::numeric_limits<double>::quiet_NaN();
        failed.pc = std::numeric_limits<double>::quiet_NaN();
        failed.throughput = std::numeric_limits<double>::quiet_NaN();
        failed.converged = false;
        return failed;
    };
    for (const int n : n_values) {
        try {
            out.push_back(solve(spec, n, retry_limit, phy));
        } catch (const ModelError&) {
            out.push_back(failed_entry(n));
        } catch (const InsufficientDataError&) {
            out.push_back(failed_entry(n));
        }
    }
    return out;
}

}  // namespace backlab
