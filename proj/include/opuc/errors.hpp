#pragma once

// Exception hierarchy for the opuc library. Every domain failure derives from
// opuc::Error so callers (and the CLI) can catch one type and report its name.

#include <stdexcept>
#include <string>

namespace opuc {

struct Error : std::runtime_error {
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// A requested or computed Verblunsky coefficient left the open unit disk
// (or a parameter set would force it to).
struct AdmissibilityError : Error {
  using Error::Error;
};

// A reflection coefficient in the Levinson recursion reached modulus ~1:
// the Toeplitz system is numerically singular (ill-conditioning, not math failure).
struct NumericalBreakdown : Error {
  using Error::Error;
};

// An evaluation point that must lie strictly inside a spectral gap does not.
struct OutOfGapError : Error {
  using Error::Error;
};

// 2x2 eigenproblem has (numerically) coincident eigenvalue moduli.
struct DegenerateError : Error {
  using Error::Error;
};

// A transfer matrix inside a tracked range is not hyperbolic.
struct HyperbolicityError : Error {
  using Error::Error;
};

// A denominator sequence handed to the limit extractor is not strictly increasing.
struct MonotonicityError : Error {
  using Error::Error;
};

// Band scan grid too coarse to resolve the crossing structure.
struct ResolutionError : Error {
  using Error::Error;
};

// Malformed experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace opuc
