#pragma once

// Type I_n von Neumann algebra realized as n x n matrix fields over the
// atoms of Omega. The center is the step functions acting by scalars.

#include <cstddef>
#include <vector>

#include "kaplansky/bundle.hpp"
#include "kaplansky/spectral.hpp"

namespace kaplansky {

class MatrixField {
 public:
  MatrixField(MeasureSpace space, std::vector<ComplexMatrix> fibers);
  MatrixField(BundlePtr bundle, std::vector<ComplexMatrix> fibers);

  static MatrixField zero(const MeasureSpace& space, std::size_t n);
  static MatrixField identity(const MeasureSpace& space, std::size_t n);

  /// Bundle with a unit-weight n-point grid, so the field is also a
  /// BundleOperator for the Euclidean inner product.
  const BundlePtr& bundle() const noexcept { return bundle_; }
  const MeasureSpace& space() const noexcept { return bundle_->space; }
  std::size_t atoms() const noexcept { return fibers_.size(); }
  std::size_t dim() const noexcept { return bundle_->dim(); }
  const ComplexMatrix& fiber(std::size_t atom) const { return fibers_[atom]; }
  const std::vector<ComplexMatrix>& fibers() const noexcept { return fibers_; }

  BundleOperator as_operator() const { return BundleOperator(bundle_, fibers_); }
  MatrixField adjoint() const;
  bool all_finite() const;
  /// Max over fibers of the spectral norm.
  double norm() const;

  friend MatrixField operator+(const MatrixField& a, const MatrixField& b);
  friend MatrixField operator-(const MatrixField& a, const MatrixField& b);
  friend MatrixField operator*(const MatrixField& a, const MatrixField& b);
  friend MatrixField operator*(const StepFunction& c, const MatrixField& x);

 private:
  void check_shape() const;

  BundlePtr bundle_;
  std::vector<ComplexMatrix> fibers_;
};

/// A matrix field with p = p* = p^2 on every fiber.
class ProjectionField {
 public:
  explicit ProjectionField(MatrixField p, double tol = 1e-12);

  const MatrixField& field() const noexcept { return p_; }
  /// Fiber ranks (traces rounded to integers).
  std::vector<std::size_t> ranks() const;
  /// 1 - p
  ProjectionField complement() const;

 private:
  MatrixField p_;
};

/// Rank-homogeneous pieces q_n of a projection, ascending in rank; only
/// nonempty pieces are listed and together they partition Omega.
struct HomogeneousDecomposition {
  std::vector<std::size_t> ranks;
  std::vector<Idempotent> pieces;

  PartitionOfUnity partition() const { return PartitionOfUnity(pieces); }
};

/// Orthogonal projection onto the column space of each fiber (numerical
/// rank at rank_tol relative to the fiber's largest singular value).
ProjectionField left_support(const MatrixField& y, double rank_tol = 1e-10);

HomogeneousDecomposition homogeneous_decomposition(const ProjectionField& p);

struct Truncation {
  /// Projection onto the right-singular directions with singular value < eps.
  ProjectionField projection;
  /// Rank pieces of 1 - p, certifying that it is finitely generated.
  HomogeneousDecomposition complement;
};

Truncation truncation_projection(const MatrixField& x, double eps);

struct DiagonalClass {
  std::size_t rank = 0;
  std::vector<StepFunction> values;
  /// Rank-one (abelian) projections xi (x) xi, zero off z_k.
  std::vector<ProjectionField> projections;
  /// The eigenvectors behind the projections, phase fixed.
  std::vector<ModuleElement> vectors;
};

struct CentralDiagonalForm {
  BundlePtr bundle;
  /// z_k: atoms whose fiber has rank k, k = 0..n.
  PartitionOfUnity central_partition;
  std::vector<DiagonalClass> classes;

  /// sum_k z_k sum_n f_{k,n} p_{k,n}
  MatrixField reconstruct() const;
};

CentralDiagonalForm diagonalize(const MatrixField& x, const Config& config = {});

struct DiagonalMatrixForm {
  /// Columns: eigenvectors of the form, completed to an orthonormal basis.
  MatrixField unitary;
  /// Eigenvalues in |.|-descending order, then zeros.
  MatrixField diagonal;
};

DiagonalMatrixForm to_diagonal_matrix(const CentralDiagonalForm& form);

/// Per fiber spectral norm of U* x U - D.
StepFunction diagonal_residual(const MatrixField& x, const DiagonalMatrixForm& form);

}  // namespace kaplansky
