#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace backlab {

struct CcdfPoint {
    double x;
    double tail_prob;  // fraction of samples >= x
};

// Empirical survival function over the distinct sample values, ascending in
// x. Throws std::invalid_argument on empty input.
std::vector<CcdfPoint> ccdf(std::span<const double> samples);

enum class TailFitMethod { LogLogOls, Hill };

struct TailFit {
    TailFitMethod method;
    double alpha_hat;
    std::optional<double> r_squared;  // OLS only
    double tail_fraction;
    std::int64_t sample_count;
};

// Tail index from an ordinary least-squares fit of log tail probability
// against log x over the largest tail_fraction of the samples. Needs at
// least 1000 samples with at least 100 points in the fitted tail.
TailFit loglog_slope(std::span<const double> samples,
                     double tail_fraction = 0.1);

// Hill estimator over the top k order statistics; k = floor(sqrt(n)) when
// not given. Ties that zero the denominator raise FitError.
TailFit hill_estimate(std::span<const double> samples, int k = 0);

struct VarianceCheckpoint {
    std::int64_t n_used;
    double running_variance;
};

struct VarianceGrowth {
    std::vector<VarianceCheckpoint> checkpoints;
    bool divergence_suspected;
};

// Sample variance over growing prefixes (n/windows, 2n/windows, ..., n).
// The divergence flag is a heuristic, not a proof: it fires when the final
// variance sits at least 3x above the first checkpoint and the growth is
// sustained (a majority of checkpoints at or above the first).
VarianceGrowth variance_growth(std::span<const double> samples,
                               int windows = 10);

struct FairnessReport {
    std::vector<std::int64_t> per_node;
    double mean;
    std::int64_t min;
    std::int64_t max;
    std::optional<double> jain_index;  // nullopt when all counts are zero
    double starved_fraction;
};

// Jain index (sum x)^2 / (n sum x^2) plus the fraction of nodes delivering
// fewer than starvation_threshold * mean packets.
FairnessReport fairness(std::span<const std::int64_t> per_node,
                        double starvation_threshold = 0.1);

}  // namespace backlab
