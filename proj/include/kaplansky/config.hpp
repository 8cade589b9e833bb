#pragma once

#include <cstddef>

namespace kaplansky {

/// Numerical tolerances and the fiber-level thread budget shared by every
/// operation.
struct Config {
  /// Fiber singular/eigen values with magnitude <= rank_tol * (largest
  /// magnitude in that fiber) count as zero.
  double rank_tol = 1e-10;
  /// Absolute tolerance for matching a function-valued lambda against an
  /// eigenvalue branch.
  double solve_tol = 1e-8;
  /// Absolute tolerance standing in for almost-everywhere equality.
  double equality_tol = 1e-12;
  /// Maximum number of fibers processed concurrently; 0 picks the hardware
  /// concurrency.
  std::size_t parallelism = 0;

  void validate() const;
};

}  // namespace kaplansky
