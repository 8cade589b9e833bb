#pragma once

// Partial integral operators
//   T(f)(t, w) = int_S k(t, s, w) f(s, w) ds
// on the sampled module, and the solvability of T f = lambda f for a
// function-valued lambda.

#include <compare>
#include <cstddef>
#include <optional>
#include <vector>

#include "kaplansky/bundle.hpp"
#include "kaplansky/spectral.hpp"

namespace kaplansky {

/// Kernel samples k(t_i, s_j, w) per atom on the grid (no quadrature
/// absorbed).
class KernelBundle {
 public:
  KernelBundle(BundlePtr bundle, std::vector<ComplexMatrix> samples, bool selfadjoint);

  const BundlePtr& bundle() const noexcept { return bundle_; }
  const std::vector<ComplexMatrix>& samples() const noexcept { return samples_; }
  const ComplexMatrix& sample(std::size_t atom) const { return samples_[atom]; }
  bool flagged_selfadjoint() const noexcept { return selfadjoint_; }
  bool all_finite() const;

 private:
  BundlePtr bundle_;
  std::vector<ComplexMatrix> samples_;
  bool selfadjoint_;
};

struct HsReport {
  /// sum_{t,s} w_t w_s |k(t, s, w)|^2 per atom.
  StepFunction per_atom;
  /// Its maximum over atoms.
  double sup = 0.0;
};

HsReport hs_check(const KernelBundle& kernel);

/// Largest |k(t,s,w) - conj(k(s,t,w))| and where it occurs.
struct AsymmetryReport {
  double max_defect = 0.0;
  std::size_t atom = 0;
  std::size_t row = 0;
  std::size_t col = 0;
};

AsymmetryReport kernel_asymmetry(const KernelBundle& kernel);

/// Whether the kernel satisfies k(t,s,w) = conj(k(s,t,w)) within
/// equality_tol (scaled by the largest entry when that exceeds 1).
bool kernel_is_selfadjoint(const KernelBundle& kernel, const Config& config = {});

/// Fiber maps A_ij = k(t_i, s_j, w) w_j.
BundleOperator build_operator(const KernelBundle& kernel);

SpectralDecomposition kernel_spectrum(const KernelBundle& kernel, const Config& config = {});

/// Eigenvalue branch lambda_{k,n}: the n-th eigenvalue (|.|-descending) of
/// rank class k. The branch {0, 0} is the eigenvalue 0 on every atom whose
/// fiber is rank deficient.
struct Branch {
  std::size_t k = 0;
  std::size_t n = 0;
  auto operator<=>(const Branch&) const = default;
};

inline constexpr Branch kZeroBranch{0, 0};

struct SolvabilityWitness {
  Idempotent pi;
  Branch branch;
  ModuleElement eigenfunction;
  /// max over pi of |lambda - lambda_{k,n}|
  double max_gap = 0.0;
};

/// Scans all branches for atoms where |lambda - lambda_{k,n}| <= solve_tol.
/// Returns the branch with the largest match set (ties: smallest (k, n)),
/// or nullopt when no atom matches any branch.
std::optional<SolvabilityWitness> check_solvable(const KernelBundle& kernel, const StepFunction& lambda,
                                                 const Config& config = {});

struct PieSolution {
  ModuleElement f;
  SolvabilityWitness witness;
  /// module norm of T f - lambda f
  double residual = 0.0;
  /// 10 * solve_tol * |T|
  double bound = 0.0;
};

/// Throws NotSolvable when no witness exists and Inconsistent when the
/// witness fails the residual bound.
PieSolution solve_pie(const KernelBundle& kernel, const StepFunction& lambda, const Config& config = {});

}  // namespace kaplansky
