#include "backlab/backoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "backlab/errors.hpp"

namespace backlab {

namespace {

void validate_w0(int w0) {
    if (w0 < 2) {
        throw std::invalid_argument("w0 must be at least 2, got " +
                                    std::to_string(w0));
    }
}

}  // namespace

BackoffSpec BackoffSpec::exponential(double r, int w0) {
    if (!(r > 1.0)) {
        throw std::invalid_argument("exponential backoff requires r > 1");
    }
    validate_w0(w0);
    BackoffSpec spec;
    spec.family = BackoffFamily::Exponential;
    spec.r = r;
    spec.w0 = w0;
    return spec;
}

BackoffSpec BackoffSpec::sub_exponential(double r, double a, int w0) {
    if (!(r > 1.0)) {
        throw std::invalid_argument("sub-exponential backoff requires r > 1");
    }
    if (!(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument(
            "sub-exponential backoff requires a in (0, 1)");
    }
    validate_w0(w0);
    BackoffSpec spec;
    spec.family = BackoffFamily::SubExponential;
    spec.r = r;
    spec.a = a;
    spec.w0 = w0;
    return spec;
}

BackoffSpec BackoffSpec::polynomial(double b, int w0) {
    if (!(b > 0.0)) {
        throw std::invalid_argument("polynomial backoff requires b > 0");
    }
    validate_w0(w0);
    BackoffSpec spec;
    spec.family = BackoffFamily::Polynomial;
    spec.b = b;
    spec.w0 = w0;
    return spec;
}

BackoffSpec BackoffSpec::custom_table(std::vector<double> values, int w0) {
    if (values.empty()) {
        throw std::invalid_argument("backoff table must not be empty");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) {
            throw std::invalid_argument("backoff table entries must be positive");
        }
        if (i > 0 && values[i] < values[i - 1]) {
            throw std::invalid_argument(
                "backoff table must be non-decreasing (entry " +
                std::to_string(i) + ")");
        }
    }
    validate_w0(w0);
    BackoffSpec spec;
    spec.family = BackoffFamily::Table;
    spec.table = std::move(values);
    spec.w0 = w0;
    return spec;
}

double growth_factor(const BackoffSpec& spec, int k) {
    if (k < 0) {
        throw std::invalid_argument("backoff stage must be non-negative");
    }
    switch (spec.family) {
        case BackoffFamily::Exponential:
            return std::pow(spec.r, static_cast<double>(k));
        case BackoffFamily::SubExponential:
            return std::pow(spec.r, std::pow(static_cast<double>(k), spec.a));
        case BackoffFamily::Polynomial:
            return 1.0 + std::pow(static_cast<double>(k), spec.b);
        case BackoffFamily::Table:
            if (static_cast<std::size_t>(k) >= spec.table.size()) {
                throw std::out_of_range("backoff table has " +
                                        std::to_string(spec.table.size()) +
                                        " entries, stage " + std::to_string(k) +
                                        " requested");
            }
            return spec.table[static_cast<std::size_t>(k)];
    }
    throw std::logic_error("unknown backoff family");
}

double growth_ratio(const BackoffSpec& spec, int k) {
    if (k < 0) {
        throw std::invalid_argument("backoff stage must be non-negative");
    }
    const double kd = static_cast<double>(k);
    switch (spec.family) {
        case BackoffFamily::Exponential:
            return spec.r;
        case BackoffFamily::SubExponential:
            // r^((k+1)^a - k^a); the exponent difference stays small, so this
            // never overflows even where r^(k^a) would.
            return std::pow(spec.r,
                            std::pow(kd + 1.0, spec.a) - std::pow(kd, spec.a));
        case BackoffFamily::Polynomial:
            return (1.0 + std::pow(kd + 1.0, spec.b)) /
                   (1.0 + std::pow(kd, spec.b));
        case BackoffFamily::Table:
            return growth_factor(spec, k + 1) / growth_factor(spec, k);
    }
    throw std::logic_error("unknown backoff family");
}

Window window(const BackoffSpec& spec, int k) {
    const double analytic = growth_factor(spec, k) * spec.w0;
    // Keep the integer window inside int64 range; windows this large are
    // unreachable within any finite simulation anyway.
    constexpr double kMaxWindow = 4.6e18;
    std::int64_t integer_window;
    if (analytic >= kMaxWindow) {
        integer_window = static_cast<std::int64_t>(kMaxWindow);
    } else {
        integer_window = std::max<std::int64_t>(2, std::llround(analytic));
    }
    return Window{analytic, integer_window};
}

GammaEstimate gamma_limit(const BackoffSpec& spec) {
    switch (spec.family) {
        case BackoffFamily::Exponential:
            return {spec.r, false};
        case BackoffFamily::SubExponential:
        case BackoffFamily::Polynomial:
            // lim r^((j+1)^a - j^a) = 1 and lim (1+(j+1)^b)/(1+j^b) = 1.
            return {1.0, false};
        case BackoffFamily::Table: {
            constexpr std::size_t kMinEntries = 32;
            constexpr std::size_t kTailRatios = 8;
            if (spec.table.size() < kMinEntries) {
                throw InsufficientDataError(
                    "gamma estimate needs a table with at least 32 entries, "
                    "got " +
                    std::to_string(spec.table.size()));
            }
            const std::size_t last = spec.table.size() - 1;
            double ratios[kTailRatios];
            double sum = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = 0.0;
            for (std::size_t i = 0; i < kTailRatios; ++i) {
                // oldest first
                const std::size_t j = last - (kTailRatios - 1 - i);
                ratios[i] = spec.table[j] / spec.table[j - 1];
                sum += ratios[i];
                lo = std::min(lo, ratios[i]);
                hi = std::max(hi, ratios[i]);
            }
            const double mean = sum / kTailRatios;
            // A drifting-but-monotone ratio sequence is a settling table;
            // oscillation means the differences keep flipping sign, as in a
            // table alternating 2^k with 3*2^(k-1).
            int flips = 0;
            double prev_diff = 0.0;
            for (std::size_t i = 1; i < kTailRatios; ++i) {
                const double diff = ratios[i] - ratios[i - 1];
                if (diff * prev_diff < 0.0) {
                    ++flips;
                }
                if (diff != 0.0) {
                    prev_diff = diff;
                }
            }
            const bool oscillating = flips >= 3 && (hi - lo) > 1e-3 * mean;
            return {mean, oscillating};
        }
    }
    throw std::logic_error("unknown backoff family");
}

GrowthClass growth_class(const BackoffSpec& spec) {
    const GammaEstimate gamma = gamma_limit(spec);
    if (gamma.oscillating) {
        throw ClassificationError(
            "table growth ratios oscillate; gamma limit undefined");
    }
    constexpr double kGammaTolerance = 1e-6;
    return {gamma.value > 1.0 + kGammaTolerance, gamma.value};
}

}  // namespace backlab
