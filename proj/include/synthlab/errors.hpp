#pragma once

#include <stdexcept>
#include <string>

namespace synthlab {

// Base for all library errors so callers can catch one type at the boundary.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Dimension/shape disagreement between operands.
class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& what) : Error(what) {}
};

// Invalid argument value (out-of-range step, kind mismatch, bad config field).
class ArgumentError : public Error {
public:
  explicit ArgumentError(const std::string& what) : Error(what) {}
};

// Softmax row with no live entries.
class DegenerateRowError : public ArgumentError {
public:
  explicit DegenerateRowError(const std::string& what) : ArgumentError(what) {}
};

// Non-finite value produced where finite math is required.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

// A sampled series whose train part cannot be scaled (flat or too short);
// callers resample on catching this.
class DegenerateSampleError : public Error {
public:
  explicit DegenerateSampleError(const std::string& what) : Error(what) {}
};

// Not enough observations to fit the requested model or protocol step.
class InsufficientDataError : public Error {
public:
  explicit InsufficientDataError(const std::string& what) : Error(what) {}
};

// History wider than the model's maximum context.
class ContextOverflowError : public ArgumentError {
public:
  explicit ContextOverflowError(const std::string& what)
      : ArgumentError(what) {}
};

// Requested horizon beyond the model's head width.
class HorizonOverflowError : public ArgumentError {
public:
  explicit HorizonOverflowError(const std::string& what)
      : ArgumentError(what) {}
};

// File/serialization failures.
class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace synthlab
