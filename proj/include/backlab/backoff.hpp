#pragma once

#include <cstdint>
#include <vector>

namespace backlab {

enum class BackoffFamily {
    Exponential,     // g(k) = r^k, r > 1
    SubExponential,  // g(k) = r^(k^a), r > 1, 0 < a < 1
    Polynomial,      // g(k) = 1 + k^b, b > 0
    Table,           // g(k) = values[k], finite
};

// A backoff function family together with the initial contention window.
// The stage-k contention window is W_k = g(k) * w0. Instances are immutable
// value types; every operation on them is a pure function.
struct BackoffSpec {
    BackoffFamily family = BackoffFamily::Exponential;
    double r = 2.0;
    double a = 0.7;
    double b = 1.0;
    std::vector<double> table;
    int w0 = 16;

    static BackoffSpec exponential(double r, int w0 = 16);
    static BackoffSpec sub_exponential(double r, double a, int w0 = 16);
    static BackoffSpec polynomial(double b, int w0 = 16);
    static BackoffSpec custom_table(std::vector<double> values, int w0 = 16);

    bool operator==(const BackoffSpec&) const = default;
};

// g(k) for the given stage. Throws std::out_of_range when a table spec is
// indexed past its last entry.
double growth_factor(const BackoffSpec& spec, int k);

// g(k+1)/g(k), computed in a form that stays finite even where g(k) itself
// would overflow a double (needed by the series evaluations).
double growth_ratio(const BackoffSpec& spec, int k);

struct Window {
    double analytic;               // g(k) * w0, used by all analytic paths
    std::int64_t integer_window;   // max(2, round(analytic)), simulator only
};

Window window(const BackoffSpec& spec, int k);

struct GammaEstimate {
    double value;      // lim g(j+1)/g(j); closed form for EB/SEB/PB
    bool oscillating;  // table ratios do not settle; value is their mean
};

// Limit of the consecutive-stage growth ratio. Closed form for the analytic
// families; for tables, the mean of the last 8 ratios (>= 32 entries needed,
// otherwise InsufficientDataError).
GammaEstimate gamma_limit(const BackoffSpec& spec);

struct GrowthClass {
    bool at_least_exponential;  // gamma > 1: grows at least like some r^k
    double gamma;
};

// Dichotomy on the gamma limit with a 1e-6 separation tolerance. Throws
// ClassificationError for oscillating tables.
GrowthClass growth_class(const BackoffSpec& spec);

}  // namespace backlab
