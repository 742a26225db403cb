#pragma once

#include <stdexcept>
#include <string>

namespace muskat {

/// Base of every error the simulator raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResolutionMismatch : public Error {
 public:
  using Error::Error;
};

/// min J fell to the degeneracy threshold: fold-over, or the interface is
/// about to reach the permeability curve.
class DiffeoDegenerate : public Error {
 public:
  using Error::Error;
};

/// The interface came within gap_tol of the permeability curve.
class GapViolation : public Error {
 public:
  using Error::Error;
};

class NonSPDSystem : public Error {
 public:
  using Error::Error;
};

class SolverDivergence : public Error {
 public:
  using Error::Error;
};

/// Picard iterates for the head do not contract (data outside the small regime).
class NoContraction : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace muskat
