#include "backlab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "backlab/errors.hpp"

namespace backlab {

namespace {

constexpr double kRelTol = 1e-12;
constexpr int kMinTerms = 32;
constexpr int kDivergenceRun = 64;
constexpr long kMaxTerms = 10'000'000;

void check_pc_open(double pc) {
    if (!(pc >= 0.0 && pc < 1.0)) {
        throw std::invalid_argument("collision probability must lie in [0, 1)");
    }
}

// E[Lambda^2] = (1-pc) sum_j pc^j [ V_j + M_j^2 ], with V_j and M_j the
// cumulative counter variance and mean up to stage j. The first part
// telescopes to sum_k pc^k Var[B_k]; the second is summed directly, with
// the j-term carried as pc^j M_j^2 via ratio updates so the evaluation
// stays finite even where W_j^2 would overflow.
std::optional<double> lambda_second_moment(const BackoffSpec& spec,
                                           double pc) {
    const long table_last = spec.family == BackoffFamily::Table
                                ? static_cast<long>(spec.table.size()) - 1
                                : std::numeric_limits<long>::max();

    // Part 1: sum_k pc^k (W_k^2 - 1)/12.
    double var_part = 0.0;
    {
        const double w0 = growth_factor(spec, 0) * spec.w0;
        double z = w0 * w0;  // pc^k W_k^2
        double y = 1.0;      // pc^k
        double prev = std::numeric_limits<double>::infinity();
        int nondecreasing = 0;
        for (long k = 0;; ++k) {
            const double term = (z - y) / 12.0;
            if (!std::isfinite(term)) {
                return std::nullopt;
            }
            var_part += term;
            if (term >= prev) {
                if (++nondecreasing >= kDivergenceRun) {
                    return std::nullopt;
                }
            } else {
                nondecreasing = 0;
            }
            if ((k + 1 >= kMinTerms && term < kRelTol * var_part) ||
                k >= kMaxTerms) {
                break;
            }
            if (k >= table_last) {
                if (term < kRelTol * var_part) {
                    break;
                }
                throw InsufficientDataError(
                    "backoff table too short for the second-moment series");
            }
            const double ratio = growth_ratio(spec, static_cast<int>(k));
            z *= pc * ratio * ratio;
            y *= pc;
            prev = term;
        }
    }

    // Part 2: (1-pc) sum_j pc^j M_j^2. Tracked quantities: q_j = pc^j M_j^2,
    // rel_j = E[B_j]/M_j (bounded in (0, 1]), and the stage mean ratio
    // rho_j = E[B_{j+1}]/E[B_j].
    double mean_sq_part = 0.0;
    {
        const double w0 = growth_factor(spec, 0) * spec.w0;
        double w = w0;  // W_j, saturated once it exceeds 1e300
        double q = 0.25 * (w0 - 1.0) * (w0 - 1.0);
        double rel = 1.0;
        double prev = std::numeric_limits<double>::infinity();
        int nondecreasing = 0;
        for (long j = 0;; ++j) {
            if (!std::isfinite(q)) {
                return std::nullopt;
            }
            mean_sq_part += q;
            if (q >= prev) {
                if (++nondecreasing >= kDivergenceRun) {
                    return std::nullopt;
                }
            } else {
                nondecreasing = 0;
            }
            if ((j + 1 >= kMinTerms && q < kRelTol * mean_sq_part) ||
                j >= kMaxTerms) {
                break;
            }
            if (j >= table_last) {
                if (q < kRelTol * mean_sq_part) {
                    break;
                }
                throw InsufficientDataError(
                    "backoff table too short for the second-moment series");
            }
            const double ratio = growth_ratio(spec, static_cast<int>(j));
            // rho = (W_{j+1} - 1)/(W_j - 1); once W saturates the -1 is noise.
            const double rho =
                w < 1e300 ? (w * ratio - 1.0) / (w - 1.0) : ratio;
            const double growth = 1.0 + rel * rho;  // M_{j+1}/M_j
            prev = q;
            q *= pc * growth * growth;
            rel = rel * rho / growth;
            w = std::min(w * ratio, 1e300);
        }
        mean_sq_part *= (1.0 - pc);
    }

    return var_part + mean_sq_part;
}

}  // namespace

MomentReport moment_finite(const BackoffSpec& spec, double pc, int order) {
    if (order < 1) {
        throw std::invalid_argument("moment order must be at least 1");
    }
    check_pc_open(pc);
    const GrowthClass cls = growth_class(spec);
    const double criterion = pc * std::pow(cls.gamma, order);
    const bool finite = criterion < 1.0;
    MomentReport report{order, finite, std::nullopt, criterion};
    if (finite && order <= 2) {
        const CountdownMoments m = countdown_moments(spec, pc);
        report.value = order == 1 ? m.mean : m.variance;
    }
    return report;
}

std::optional<double> powerlaw_slope(const BackoffSpec& spec, double pc) {
    check_pc_open(pc);
    const GrowthClass cls = growth_class(spec);
    if (!cls.at_least_exponential) {
        return std::nullopt;
    }
    return -std::log(pc) / std::log(cls.gamma);
}

CountdownMoments countdown_moments(const BackoffSpec& spec, double pc) {
    check_pc_open(pc);
    CountdownMoments out;
    const BackoffSeries mean_series =
        mean_backoff_series(spec, pc, RetryLimit::unlimited());
    if (!mean_series.diverged && std::isfinite(mean_series.sum)) {
        out.mean = mean_series.sum;
    }
    if (!out.mean.has_value()) {
        return out;  // divergent mean implies divergent variance
    }
    const std::optional<double> second = lambda_second_moment(spec, pc);
    if (second.has_value()) {
        out.variance = *second - *out.mean * *out.mean;
    }
    return out;
}

std::optional<double> mean_delay_us(const BackoffSpec& spec,
                                    const FixedPointSolution& sol,
                                    const PhyProfile& phy) {
    const CountdownMoments m = countdown_moments(spec, sol.pc);
    if (!m.mean.has_value()) {
        return std::nullopt;
    }
    // Countdown-slot mix seen by a tagged node: the other n-1 nodes drive
    // the channel during its countdown.
    double q_idle = 1.0;
    double q_succ = 0.0;
    if (sol.n > 1) {
        q_idle = std::pow(1.0 - sol.tau, sol.n - 1);
        q_succ = (sol.n - 1) * sol.tau * std::pow(1.0 - sol.tau, sol.n - 2);
    }
    const double q_coll = std::max(0.0, 1.0 - q_idle - q_succ);
    const double slot_us = q_idle * phy.t_idle_us + q_succ * phy.t_succ_us +
                           q_coll * phy.t_coll_us;
    const double own_collisions = sol.pc / (1.0 - sol.pc);
    return *m.mean * slot_us + own_collisions * phy.t_coll_us + phy.t_succ_us;
}

CountdownPmf lambda_pmf(const BackoffSpec& spec, double pc, int n_max) {
    check_pc_open(pc);
    if (n_max < spec.w0) {
        throw std::invalid_argument(
            "n_max must cover at least the initial window");
    }

    // Stages beyond the point where pc^j < 1e-12 contribute nothing visible.
    int j_cut = 1;
    while (pc > 0.0 && std::pow(pc, j_cut) >= 1e-12) {
        ++j_cut;
    }

    const std::size_t size = static_cast<std::size_t>(n_max) + 1;
    std::vector<double> pmf(size, 0.0);
    std::vector<double> conv(size, 0.0);
    std::vector<double> prefix(size + 1, 0.0);
    conv[0] = 1.0;
    double stage_weight = 1.0 - pc;

    for (int j = 0; j < j_cut; ++j) {
        if (spec.family == BackoffFamily::Table &&
            static_cast<std::size_t>(j) >= spec.table.size()) {
            throw InsufficientDataError(
                "backoff table too short for the requested pmf");
        }
        // Convolve with the uniform counter of stage j: a sliding window
        // average over the previous distribution. Counter support is
        // {0, ..., ceil(W_j) - 1}.
        const double analytic = growth_factor(spec, j) * spec.w0;
        const std::int64_t w =
            analytic >= 4.6e18
                ? static_cast<std::int64_t>(4.6e18)
                : std::max<std::int64_t>(
                      2, static_cast<std::int64_t>(std::ceil(analytic)));
        prefix[0] = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            prefix[i + 1] = prefix[i] + conv[i];
        }
        const double inv_w = 1.0 / static_cast<double>(w);
        for (std::size_t i = 0; i < size; ++i) {
            const std::size_t lo =
                static_cast<std::int64_t>(i) - w + 1 > 0
                    ? static_cast<std::size_t>(static_cast<std::int64_t>(i) -
                                               w + 1)
                    : 0;
            conv[i] = (prefix[i + 1] - prefix[lo]) * inv_w;
        }
        for (std::size_t i = 0; i < size; ++i) {
            pmf[i] += stage_weight * conv[i];
        }
        stage_weight *= pc;
    }

    double captured = 0.0;
    for (const double v : pmf) {
        captured += v;
    }
    CountdownPmf out;
    out.p = std::move(pmf);
    out.pc = pc;
    out.truncation_mass = std::max(0.0, 1.0 - captured);
    out.underresolved = captured < 1.0 - 1e-3;
    return out;
}

LightTailFit lighttail_fit(const CountdownPmf& pmf) {
    const std::size_t n_max = pmf.p.size() - 1;
    const std::size_t lo = n_max / 2;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    int count = 0;
    for (std::size_t n = lo; n <= n_max; ++n) {
        if (pmf.p[n] > 1e-30) {
            const double x = static_cast<double>(n);
            const double y = std::log(pmf.p[n]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
            ++count;
        }
    }
    if (count < 64) {
        throw FitError("pmf upper half has only " + std::to_string(count) +
                       " usable entries; at least 64 needed");
    }
    const double inv = 1.0 / count;
    const double cov = sxy - sx * sy * inv;
    const double var_x = sxx - sx * sx * inv;
    const double var_y = syy - sy * sy * inv;
    const double slope = cov / var_x;
    const double ss_res = var_y - cov * cov / var_x;
    const double r_squared = var_y > 0.0 ? 1.0 - ss_res / var_y : 1.0;
    return {-slope, r_squared, count};
}

double lerch_phi(double z, double s, double v, double tol) {
    if (!(z > 0.0 && z < 1.0)) {
        throw std::invalid_argument("lerch_phi requires 0 < z < 1");
    }
    if (v < 0.0) {
        throw std::invalid_argument("lerch_phi requires v >= 0");
    }
    if (v == 0.0 && s > 0.0) {
        throw std::invalid_argument(
            "lerch_phi diverges at the i = 0 term for v = 0, s > 0");
    }
    double sum = 0.0;
    if (v > 0.0) {
        sum = std::pow(v, -s);
    } else if (s == 0.0) {
        sum = 1.0;  // 0^0 convention
    }
    double zi = 1.0;
    double prev_term = std::numeric_limits<double>::infinity();
    for (long i = 1; i < 10'000'000; ++i) {
        zi *= z;
        const double term = zi * std::pow(v + i, -s);
        sum += term;
        // Terms of negative-s series first grow; only trust the tolerance
        // once they are clearly shrinking.
        if (i >= 8 && term < prev_term && term < tol * sum) {
            return sum;
        }
        prev_term = term;
    }
    throw std::runtime_error("lerch_phi failed to converge");
}

double pb_moment_lower_bound(double b, int w0, double pc, int order) {
    if (!(b > 0.0)) {
        throw std::invalid_argument("polynomial order must be positive");
    }
    if (!(pc > 0.0 && pc < 1.0)) {
        throw std::invalid_argument("collision probability must lie in (0, 1)");
    }
    const double s = -(b * order + 1.0);
    return (1.0 - pc) / (b * order + 1.0) *
           std::pow(0.5 * w0, static_cast<double>(order)) *
           lerch_phi(pc, s, 0.0);
}

TailClass classify_tail(const BackoffSpec& spec, double pc) {
    check_pc_open(pc);
    switch (spec.family) {
        case BackoffFamily::Exponential:
            return {TailRegion::PowerLaw, -std::log(pc) / std::log(spec.r)};
        case BackoffFamily::SubExponential:
            return {TailRegion::HeavyNonPowerLaw, std::nullopt};
        case BackoffFamily::Polynomial:
            return {spec.b > 1.0 ? TailRegion::HeavyNonPowerLaw
                                 : TailRegion::LightTail,
                    std::nullopt};
        case BackoffFamily::Table: {
            const GrowthClass cls = growth_class(spec);
            if (cls.at_least_exponential) {
                return {TailRegion::PowerLaw,
                        -std::log(pc) / std::log(cls.gamma)};
            }
            return {TailRegion::NonPowerLawUnresolved, std::nullopt};
        }
    }
    throw std::logic_error("unknown backoff family");
}

const char* tail_region_name(TailRegion region) {
    switch (region) {
        case TailRegion::PowerLaw:
            return "power-law";
        case TailRegion::HeavyNonPowerLaw:
            return "heavy-non-power-law";
        case TailRegion::LightTail:
            return "light-tail";
        case TailRegion::NonPowerLawUnresolved:
            return "non-power-law";
    }
    return "unknown";
}

}  // namespace backlab
