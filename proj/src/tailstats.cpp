#include "backlab/tailstats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "backlab/errors.hpp"

namespace backlab {

std::vector<CcdfPoint> ccdf(std::span<const double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("ccdf needs at least one sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<CcdfPoint> points;
    // tail_prob at value v is the fraction of samples >= v, so each distinct
    // value contributes one point at its first (lowest-index) occurrence.
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i == 0 || sorted[i] != sorted[i - 1]) {
            points.push_back({sorted[i], (sorted.size() - i) / n});
        }
    }
    return points;
}

TailFit loglog_slope(std::span<const double> samples, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 0.5)) {
        throw std::invalid_argument("tail_fraction must lie in (0, 0.5]");
    }
    const std::int64_t n = static_cast<std::int64_t>(samples.size());
    const std::int64_t m = static_cast<std::int64_t>(n * tail_fraction);
    if (n < 1000 || m < 100) {
        throw FitError("log-log fit needs >= 1000 samples with >= 100 tail "
                       "points, got " +
                       std::to_string(n) + "/" + std::to_string(m));
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    std::int64_t count = 0;
    for (std::int64_t i = 1; i <= m; ++i) {
        const double value = sorted[static_cast<std::size_t>(n - i)];
        if (value <= 0.0) {
            continue;  // log undefined; delays are positive in practice
        }
        const double x = std::log(value);
        const double y = std::log(static_cast<double>(i) / n);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++count;
    }
    if (count < 100) {
        throw FitError("too few positive tail samples for a log-log fit");
    }
    const double inv = 1.0 / count;
    const double cov = sxy - sx * sy * inv;
    const double var_x = sxx - sx * sx * inv;
    const double var_y = syy - sy * sy * inv;
    if (var_x <= 0.0) {
        throw FitError("tail samples are all equal; log-log fit undefined");
    }
    const double slope = cov / var_x;
    const double r_squared =
        var_y > 0.0 ? 1.0 - (var_y - cov * cov / var_x) / var_y : 1.0;
    return {TailFitMethod::LogLogOls, -slope, r_squared, tail_fraction, n};
}

TailFit hill_estimate(std::span<const double> samples, int k) {
    const std::int64_t n = static_cast<std::int64_t>(samples.size());
    if (k == 0) {
        k = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    }
    if (k < 2 || k >= n) {
        throw FitError("hill estimator needs 2 <= k < n");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double x_ref = sorted[static_cast<std::size_t>(n - k - 1)];
    if (x_ref <= 0.0) {
        throw FitError("hill estimator needs positive order statistics");
    }
    double denom = 0.0;
    for (std::int64_t i = 1; i <= k; ++i) {
        denom += std::log(sorted[static_cast<std::size_t>(n - i)] / x_ref);
    }
    if (denom == 0.0) {
        throw FitError("hill estimator denominator is zero (tied samples)");
    }
    return {TailFitMethod::Hill, k / denom, std::nullopt,
            static_cast<double>(k) / n, n};
}

VarianceGrowth variance_growth(std::span<const double> samples, int windows) {
    if (windows < 2) {
        throw std::invalid_argument("variance growth needs >= 2 windows");
    }
    const std::int64_t n = static_cast<std::int64_t>(samples.size());
    if (n < 10 * static_cast<std::int64_t>(windows)) {
        throw std::invalid_argument(
            "variance growth needs at least 10 samples per window");
    }
    VarianceGrowth out;
    out.checkpoints.reserve(windows);
    // Single Welford pass; checkpoints snapshot the running variance.
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t count = 0;
    std::int64_t next_checkpoint = n / windows;
    int emitted = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        ++count;
        const double delta = samples[static_cast<std::size_t>(i)] - mean;
        mean += delta / count;
        m2 += delta * (samples[static_cast<std::size_t>(i)] - mean);
        if (count == next_checkpoint) {
            out.checkpoints.push_back({count, m2 / count});
            ++emitted;
            next_checkpoint = emitted < windows
                                  ? n * (emitted + 1) / windows
                                  : -1;
        }
    }
    const double first = out.checkpoints.front().running_variance;
    const double last = out.checkpoints.back().running_variance;
    int at_or_above_first = 0;
    for (const auto& cp : out.checkpoints) {
        if (cp.running_variance >= first) {
            ++at_or_above_first;
        }
    }
    out.divergence_suspected = first > 0.0 && last >= 3.0 * first &&
                               at_or_above_first * 2 >= windows;
    return out;
}

FairnessReport fairness(std::span<const std::int64_t> per_node,
                        double starvation_threshold) {
    if (per_node.size() < 2) {
        throw std::invalid_argument("fairness needs at least two nodes");
    }
    FairnessReport report;
    report.per_node.assign(per_node.begin(), per_node.end());
    double sum = 0.0;
    double sum_sq = 0.0;
    report.min = per_node[0];
    report.max = per_node[0];
    for (const std::int64_t x : per_node) {
        if (x < 0) {
            throw std::invalid_argument("per-node counts must be non-negative");
        }
        sum += static_cast<double>(x);
        sum_sq += static_cast<double>(x) * static_cast<double>(x);
        report.min = std::min(report.min, x);
        report.max = std::max(report.max, x);
    }
    const double n = static_cast<double>(per_node.size());
    report.mean = sum / n;
    if (sum_sq > 0.0) {
        report.jain_index = sum * sum / (n * sum_sq);
    }
    const double cutoff = starvation_threshold * report.mean;
    std::int64_t starved = 0;
    for (const std::int64_t x : per_node) {
        if (static_cast<double>(x) < cutoff) {
            ++starved;
        }
    }
    report.starved_fraction = starved / n;
    return report;
}

}  // namespace backlab
