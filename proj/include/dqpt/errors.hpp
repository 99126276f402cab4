#pragma once

#include <stdexcept>
#include <string>

namespace dqpt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad inputs or broken type invariants (non-normalized spinors, overlapping regions, ...).
struct ValidationError : Error { using Error::Error; };

// Hard dimension / span caps (eig above 1024, RDM window above 8 sites, ED above L=12).
struct CapacityError : Error { using Error::Error; };

// A dense decomposition failed to converge.
struct SolverError : Error { using Error::Error; };

// An iterative solver ran out of iterations.
struct ConvergenceError : Error { using Error::Error; };

// Dominant eigenvalue is modulus-degenerate (non-injective MPS).
struct DegeneracyError : Error { using Error::Error; };

// Numerical breakdown (non-positive-definite transfer fixed point, empty truncation, ...).
struct BreakdownError : Error { using Error::Error; };

// Config file / CLI argument problems.
struct ConfigError : Error { using Error::Error; };

// An evolution step could not restore the state invariants.
struct EvolutionError : Error { using Error::Error; };

}  // namespace dqpt
