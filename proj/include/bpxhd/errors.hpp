#pragma once

#include <stdexcept>
#include <string>

namespace bpxhd {

/// Vertices of a simplex are (numerically) affinely dependent.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or index lies outside the domain of an operation.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A requested mesh or hierarchy exceeds the configured DOF budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver or eigensolver failed (non-convergence, indefiniteness, breakdown).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bpxhd
