#pragma once

#include <span>
#include <vector>

#include "backlab/backoff.hpp"
#include "backlab/phy.hpp"

namespace backlab {

struct SlotProbabilities {
    double idle;
    double success;
    double collision;
};

// Probability that a generic slot is idle / a success / a collision when n
// nodes each attempt with probability tau:
//   p_idle = (1-tau)^n,  p_succ = n tau (1-tau)^(n-1),  p_coll = remainder.
SlotProbabilities slot_probabilities(double tau, int n);

struct BackoffSeries {
    double sum;     // sum_{k=0}^{K} pc^k (W_k - 1)/2
    int terms;      // number of terms accumulated
    bool diverged;  // terms stopped decreasing; sum is the partial sum
};

// Mean backoff series sum pc^k E[B_k] with E[B_k] = (W_k - 1)/2. For an
// unlimited retry limit the series truncates once the current term drops
// below 1e-12 of the partial sum (after at least 32 terms) and is declared
// divergent after 64 consecutive non-decreasing terms. Terms are built
// incrementally from growth ratios so the evaluation never overflows.
BackoffSeries mean_backoff_series(const BackoffSpec& spec, double pc,
                                  RetryLimit retry_limit);

struct FixedPointSolution {
    int n = 1;
    double tau = 0.0;
    double pc = 0.0;
    double throughput = 0.0;
    int series_terms_used = 0;
    bool converged = false;
};

// Solves the decoupled fixed point for (tau, pc) by bisection on
// h(pc) = pc - Psi(pc), where Psi(pc) = 1 - (1 - Theta(pc))^(n-1) and
// Theta(pc) is the attempt rate implied by the mean backoff series:
//   Theta = A / (A + sum pc^k E[B_k]),   A = sum_{k=0}^{K} pc^k.
// h is strictly increasing because Psi decreases for non-decreasing g(k);
// a divergent series maps to Theta = 0 (the tau -> 0 limit), which keeps
// the bracket valid. Residual tolerance 1e-10. A root past the search cap
// 1 - 1e-9 (windows too small for the contention level, pc -> 1) yields
// the boundary solution, flagged non-converged when the residual misses
// the tolerance.
FixedPointSolution solve(const BackoffSpec& spec, int n,
                         RetryLimit retry_limit, const PhyProfile& phy);

// Normalized saturation throughput of a solved scenario:
//   S = p_succ T_succ / (p_idle T_idle + p_succ T_succ + p_coll T_coll).
double throughput(const FixedPointSolution& sol, const PhyProfile& phy);

struct AsymptoticPc {
    double limit;                   // lim_{N->inf} pc
    bool stable;                    // non-zero asymptotic throughput
    double throughput_equal_slots;  // ln(1/(1-pc)) (1-pc) at the limit
};

// Large-N behavior: families growing at least exponentially approach
// pc = 1/gamma with non-zero throughput; slower families approach pc = 1
// with vanishing throughput.
AsymptoticPc asymptotic_pc(const BackoffSpec& spec);

// Independent solves, one per entry of n_values, order preserved. A solve
// failure is reported in-place as a non-converged entry with NaN values.
std::vector<FixedPointSolution> sweep(const BackoffSpec& spec,
                                      std::span<const int> n_values,
                                      RetryLimit retry_limit,
                                      const PhyProfile& phy);

}  // namespace backlab
