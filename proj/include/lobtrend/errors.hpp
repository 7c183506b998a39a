#pragma once

#include <stdexcept>
#include <string>

namespace lobtrend {

// Invalid record or series content (crossed book, nonpositive volume, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or mismatched input data (bad CSV, wrong row count, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : DataError {
    using DataError::DataError;
};

// Bad configuration supplied by the caller (CLI flags, JSON config).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training loss became non-finite.
struct TrainingDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace lobtrend
