#pragma once

#include <stdexcept>
#include <string>

namespace backlab {

// Config file failed to parse or validate; message carries the field path.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A custom backoff table is too short for the requested computation.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Growth-rate classification is unavailable (e.g. oscillating table ratios).
struct ClassificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The fixed-point equation could not be bracketed; indicates a spec that
// violates the monotonicity assumptions of the model.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A statistical fit could not be performed on the given data.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace backlab
