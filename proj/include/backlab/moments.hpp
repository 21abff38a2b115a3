#pragma once

#include <optional>
#include <vector>

#include "backlab/backoff.hpp"
#include "backlab/fixedpoint.hpp"
#include "backlab/phy.hpp"

namespace backlab {

struct MomentReport {
    int order;
    bool finite;                  // pc * gamma^order < 1
    std::optional<double> value;  // computed for orders 1 and 2 when finite
    double criterion;             // pc * gamma^order
};

// Finiteness of E[Lambda^order] via the gamma-limit criterion. Throws
// ClassificationError for oscillating tables.
MomentReport moment_finite(const BackoffSpec& spec, double pc, int order);

// Power-law slope -ln(pc)/ln(gamma) when gamma > 1; nullopt when gamma = 1
// (all moments finite, no power law).
std::optional<double> powerlaw_slope(const BackoffSpec& spec, double pc);

struct CountdownMoments {
    std::optional<double> mean;      // sum_k pc^k E[B_k]
    std::optional<double> variance;  // E[Lambda^2] - mean^2; nullopt if divergent
};

// First two moments of the total countdown Lambda. Counters are uniform on
// [0, W_k - 1], so E[B_k] = (W_k-1)/2 and Var[B_k] = (W_k^2-1)/12; the
// second moment uses E[Lambda^2] = (1-pc) sum_j pc^j [V_j + M_j^2] with
// V_j, M_j the stage-cumulative variance and mean. Same truncation policy
// as mean_backoff_series.
CountdownMoments countdown_moments(const BackoffSpec& spec, double pc);

// Mean medium-access delay E[X] = E[Lambda] E[L] + pc/(1-pc) t_coll + t_succ,
// where E[L] is the mean countdown-slot length seen among the other n-1
// nodes. nullopt when the countdown mean diverges.
std::optional<double> mean_delay_us(const BackoffSpec& spec,
                                    const FixedPointSolution& sol,
                                    const PhyProfile& phy);

struct CountdownPmf {
    std::vector<double> p;  // p[0..n_max]
    double pc;
    double truncation_mass;  // 1 - sum(p): mass beyond n_max or the j cutoff
    bool underresolved;      // captured mass < 1 - 1e-3
};

// PMF of Lambda via stage-wise discrete convolution of uniform counters:
//   p[n] = (1-pc) sum_j pc^j (U_0 * ... * U_j)[n]
// with U_k uniform on {0, ..., ceil(W_k)-1}; the j-sum truncates once
// pc^j < 1e-12. Requires n_max >= w0.
CountdownPmf lambda_pmf(const BackoffSpec& spec, double pc, int n_max);

struct LightTailFit {
    double lambda0;    // magnitude of the fitted log-pmf slope
    double r_squared;
    int points;
};

// Least-squares fit of log p[n] against n over the upper half of the pmf
// support (entries above 1e-30). Throws FitError with fewer than 64 usable
// points.
LightTailFit lighttail_fit(const CountdownPmf& pmf);

// Lerch transcendent Phi(z, s, v) = sum_{i>=0} z^i (v+i)^(-s) by direct
// summation, for 0 < z < 1. The i = 0 term is taken as 0 when v = 0 and
// s < 0.
double lerch_phi(double z, double s, double v, double tol = 1e-12);

// Lower bound on E[Lambda^order] for polynomial backoff:
//   (1-pc)/(b n + 1) (w0/2)^n Phi(pc, -(b n + 1), 0).
double pb_moment_lower_bound(double b, int w0, double pc, int order);

enum class TailRegion {
    PowerLaw,
    HeavyNonPowerLaw,
    LightTail,
    NonPowerLawUnresolved,  // tables with gamma = 1: heavy/light split unknown
};

struct TailClass {
    TailRegion region;
    std::optional<double> alpha;  // slope, PowerLaw only
};

// Three-way tail classification: gamma > 1 gives a power law with slope
// -ln(pc)/ln(gamma); SEB and superlinear PB are heavy but not power law;
// PB with b <= 1 is light-tailed. Tables resolve only the power-law side.
TailClass classify_tail(const BackoffSpec& spec, double pc);

const char* tail_region_name(TailRegion region);

}  // namespace backlab
