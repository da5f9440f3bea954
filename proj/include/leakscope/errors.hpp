#pragma once

#include <stdexcept>
#include <string>

namespace leakscope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pipe index outside [0, n).
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Parameters violating a type invariant (non-positive resistance, x outside (0,1), ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// q_in == q_out: the data point carries no leak, so no candidate exists.
class NoLeakError : public Error {
 public:
  using Error::Error;
};

/// A bracketed root search could not find a sign change or a physically admissible root.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// A derivative is unbounded or vanishes where a reciprocal is needed.
class DerivativeError : public Error {
 public:
  using Error::Error;
};

/// A closed-form result was requested outside the conditions it holds under.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Too few or degenerate samples for a least-squares fit.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// Multi-point procedures called with too few data points.
class TooFewPointsError : public Error {
 public:
  using Error::Error;
};

}  // namespace leakscope
