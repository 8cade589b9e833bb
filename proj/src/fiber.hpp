#pragma once

// Single-fiber linear algebra shared by the spectral and von Neumann modules.
// A fiber map A acts on C^m with the inner product <x, y> = y^H W x. The
// similarity B = W^{1/2} A W^{-1/2} carries it to the Euclidean picture, where
// A self-adjoint <=> B Hermitian and singular values of A are those of B.

#include <Eigen/Dense>

#include "kaplansky/bundle.hpp"

namespace kaplansky::detail {

Eigen::VectorXd sqrt_weights(const SGrid& grid);

ComplexMatrix to_euclidean(const ComplexMatrix& a, const Eigen::VectorXd& sqrt_w);

/// Rotates v so that its first largest-modulus component is real and
/// positive; returns the unit factor applied.
Complex fix_phase(Eigen::Ref<ComplexVector> v);

/// Stable re-orthonormalization (two-pass modified Gram-Schmidt) inside each
/// run of consecutive columns whose sorted values differ by less than gap.
void orthonormalize_clusters(ComplexMatrix& columns, const Eigen::VectorXd& values, double gap);

/// Eigenpairs of a Hermitian matrix (symmetrized first). Values ascending.
struct HermitianEigen {
  Eigen::VectorXd values;
  ComplexMatrix vectors;
};
HermitianEigen hermitian_eigen(const ComplexMatrix& b);

/// Thin SVD with singular values in descending order.
struct FiberSvd {
  Eigen::VectorXd values;
  ComplexMatrix left;
  ComplexMatrix right;
};
FiberSvd fiber_svd(const ComplexMatrix& b);

/// Number of leading entries of a descending magnitude list strictly above
/// rank_tol times the first entry.
std::size_t numerical_rank(const Eigen::VectorXd& descending_magnitudes, double rank_tol);

/// Largest modulus of B - B^H.
double hermitian_defect(const ComplexMatrix& b);

}  // namespace kaplansky::detail
