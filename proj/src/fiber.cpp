#include "fiber.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace kaplansky::detail {

Eigen::VectorXd sqrt_weights(const SGrid& grid) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) s(static_cast<Eigen::Index>(i)) = std::sqrt(grid.quad_weights()[i]);
  return s;
}

ComplexMatrix to_euclidean(const ComplexMatrix& a, const Eigen::VectorXd& sqrt_w) {
  return sqrt_w.cast<Complex>().asDiagonal() * a * sqrt_w.cwiseInverse().cast<Complex>().asDiagonal();
}

Complex fix_phase(Eigen::Ref<ComplexVector> v) {
  Eigen::Index lead = -1;
  double best = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > best) {
      best = m;
      lead = i;
    }
  }
  if (lead < 0) return 1.0;
  const Complex factor = std::conj(v(lead)) / best;
  v *= factor;
  v(lead) = Complex(v(lead).real(), 0.0);
  return factor;
}

void orthonormalize_clusters(ComplexMatrix& columns, const Eigen::VectorXd& values, double gap) {
  const Eigen::Index n = columns.cols();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(values(end) - values(end - 1)) < gap) ++end;
    if (end - start > 1) {
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = start; j < end; ++j) {
          for (Eigen::Index i = start; i < j; ++i) {
            columns.col(j) -= columns.col(i).dot(columns.col(j)) * columns.col(i);
          }
          columns.col(j).normalize();
        }
      }
    }
    start = end;
  }
}

HermitianEigen hermitian_eigen(const ComplexMatrix& b) {
  const ComplexMatrix h = 0.5 * (b + b.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFinite, "fiber eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

FiberSvd fiber_svd(const ComplexMatrix& b) {
  Eigen::JacobiSVD<ComplexMatrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

std::size_t numerical_rank(const Eigen::VectorXd& descending, double rank_tol) {
  if (descending.size() == 0 || descending(0) <= 0.0) return 0;
  const double cutoff = rank_tol * descending(0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < descending.size(); ++i) {
    if (descending(i) > cutoff) ++r;
  }
  return r;
}

double hermitian_defect(const ComplexMatrix& b) {
  if (b.size() == 0) return 0.0;
  return (b - b.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace kaplansky::detail
