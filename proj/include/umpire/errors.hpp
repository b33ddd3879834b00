#pragma once

#include <stdexcept>
#include <string>

namespace umpire {

// Input violates a documented precondition or value-range contract.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Shape/layout problem: ragged rows, mismatched dimensions, misaligned ids.
struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failure: factorization breakdown, overflow, non-convergence.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace umpire
