#pragma once

#include <stdexcept>
#include <string>

namespace sensaudit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejected inputs: duplicate ids, out-of-range values, infeasible specs.
struct ValidationError : Error {
    using Error::Error;
};

// A metric that has no defined value on the given inputs (single-class
// labels, zero variance, token absent from the corpus). Distinct from a
// metric that evaluates to 0.
struct UndefinedMetricError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct WireError : Error {
    using Error::Error;
};

struct WireProtocolError : WireError {
    using WireError::WireError;
};

struct WireTimeoutError : WireError {
    using WireError::WireError;
};

}  // namespace sensaudit
