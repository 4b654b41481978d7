#pragma once

#include <stdexcept>
#include <string>

namespace corrmc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand shapes do not agree (or an index/rank is out of range).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An input violates a documented type invariant (e.g. a basis that is not
/// column-orthonormal, or a mask that does not match its sampling plan).
class InvariantViolationError : public Error {
public:
    using Error::Error;
};

/// A leverage-weighted norm is requested for a matrix with mass on a row or
/// column whose leverage score is zero (the weight would be infinite).
class UndefinedWeightError : public Error {
public:
    using Error::Error;
};

/// A prior is too degenerate for the requested computation (e.g. the
/// closed-form tradeoff weight has a vanishing denominator with a nonzero
/// numerator).
class DegeneratePriorError : public Error {
public:
    using Error::Error;
};

/// A weighting angle of pi/2 makes the prior-subspace weight undefined.
class UndefinedTangentError : public Error {
public:
    using Error::Error;
};

/// The optimization problem is unbounded below (no minimizer exists).
class UnboundedObjectiveError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (CLI flags, config files, experiment setup).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File input/output failure; the message carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace corrmc
