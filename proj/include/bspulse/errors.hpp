#pragma once

#include <stdexcept>
#include <string>

namespace bspulse {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid domain parameters (k, c, r out of range, degenerate limits).
class DomainParameterError : public Error {
 public:
  using Error::Error;
};

/// The annulus parameter solve (c,r) -> (a,b) failed to converge.
class GeometrySolveError : public Error {
 public:
  explicit GeometrySolveError(const std::string& msg, double residual)
      : Error(msg + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Argument outside the bistable range (v_min, v_max).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// The supplied kinetics has no fold points.
class NotBistableError : public Error {
 public:
  using Error::Error;
};

/// Shooting for the traveling front failed to bracket a speed.
class FrontSolveError : public Error {
 public:
  using Error::Error;
};

/// Newton for v0(w) left the bistable range.
class MassInfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Total mass outside the admissible range.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Green's function evaluated at coincident points.
class SingularEvaluationError : public Error {
 public:
  using Error::Error;
};

/// Operation not available for this domain kind.
class UnsupportedDomainError : public Error {
 public:
  using Error::Error;
};

/// Threshold w_b(k) is undefined for k <= k*.
class ThresholdUndefinedError : public Error {
 public:
  using Error::Error;
};

/// Grid resolution below the minimum.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size underflowed.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

/// Surface field left the blow-up guard.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Mid-level crossing count differs from two.
class NotASinglePulseError : public Error {
 public:
  using Error::Error;
};

/// Configuration file / key errors.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bspulse
