#pragma once

#include <stdexcept>
#include <string>

namespace emtts {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// LU pivot fell below the relative threshold.
struct SingularMatrix : Error {
    using Error::Error;
};

/// Iterative eigenvalue reduction exhausted its sweep budget.
struct NoConvergence : Error {
    using Error::Error;
};

/// Sample window too short (or not one fundamental period) for the requested harmonics.
struct InsufficientSamples : Error {
    using Error::Error;
};

struct DisconnectedCircuit : Error {
    using Error::Error;
};

struct UnsupportedComponent : Error {
    using Error::Error;
};

/// A subdomain block of H is singular.
struct SingularSubdomain : Error {
    using Error::Error;
};

/// Interface trace too degenerate to build a numeric error operator.
struct RankDeficientTrace : Error {
    using Error::Error;
};

/// I - P is singular; Aitken's formula has no solution.
struct UnitEigenvalue : Error {
    using Error::Error;
};

/// Scenario configuration failed validation.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace emtts
