#pragma once

#include <stdexcept>

namespace kspv {

// Shared error taxonomy. Input-shaped problems derive from invalid_argument
// (CLI exit code 2), numerical failures from runtime_error (exit code 3).

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidCount : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidBox : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonFiniteInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No eigenvalue/singular value survived the truncation threshold: the
// represented subspace is numerically zero.
struct AllTruncated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FactorizationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SubspaceExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDecomposition : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A cosine exceeded 1 by more than the tolerated slack, which signals
// mistuned truncation thresholds rather than harmless rounding.
struct NumericalInconsistency : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EigenFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace kspv
