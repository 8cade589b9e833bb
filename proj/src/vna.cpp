#include "kaplansky/vna.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "fiber.hpp"

namespace kaplansky {

namespace {

std::size_t leading_dim(const std::vector<ComplexMatrix>& fibers) {
  return fibers.empty() ? 0 : static_cast<std::size_t>(fibers.front().rows());
}

void require_same(const MatrixField& a, const MatrixField& b) {
  if (a.atoms() != b.atoms() || a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix fields of different shape");
  }
}

template <class Op>
MatrixField combine(const MatrixField& a, const MatrixField& b, Op op) {
  require_same(a, b);
  std::vector<ComplexMatrix> out(a.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a.fiber(i), b.fiber(i));
  return MatrixField(a.bundle(), std::move(out));
}

}  // namespace

// MatrixField -----------------------------------------------------------------

MatrixField::MatrixField(MeasureSpace space, std::vector<ComplexMatrix> fibers)
    : bundle_(make_bundle(std::move(space), SGrid::unit(leading_dim(fibers)))), fibers_(std::move(fibers)) {
  check_shape();
}

MatrixField::MatrixField(BundlePtr bundle, std::vector<ComplexMatrix> fibers)
    : bundle_(std::move(bundle)), fibers_(std::move(fibers)) {
  check_shape();
}

void MatrixField::check_shape() const {
  if (fibers_.size() != bundle_->atoms()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix field needs one matrix per atom");
  }
  const auto n = static_cast<Eigen::Index>(bundle_->dim());
  for (const auto& x : fibers_) {
    if (x.rows() != n || x.cols() != n) throw Error(ErrorCode::DimensionMismatch, "matrix field fibers must be n x n");
  }
}

MatrixField MatrixField::zero(const MeasureSpace& space, std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  return MatrixField(space, std::vector<ComplexMatrix>(space.size(), ComplexMatrix::Zero(d, d)));
}

MatrixField MatrixField::identity(const MeasureSpace& space, std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  return MatrixField(space, std::vector<ComplexMatrix>(space.size(), ComplexMatrix::Identity(d, d)));
}

MatrixField MatrixField::adjoint() const {
  std::vector<ComplexMatrix> out(atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fibers_[i].adjoint();
  return MatrixField(bundle_, std::move(out));
}

bool MatrixField::all_finite() const {
  return std::all_of(fibers_.begin(), fibers_.end(), [](const ComplexMatrix& x) { return x.allFinite(); });
}

double MatrixField::norm() const { return operator_norm(as_operator()); }

MatrixField operator+(const MatrixField& a, const MatrixField& b) {
  return combine(a, b, [](const ComplexMatrix& x, const ComplexMatrix& y) -> ComplexMatrix { return x + y; });
}
MatrixField operator-(const MatrixField& a, const MatrixField& b) {
  return combine(a, b, [](const ComplexMatrix& x, const ComplexMatrix& y) -> ComplexMatrix { return x - y; });
}
MatrixField operator*(const MatrixField& a, const MatrixField& b) {
  return combine(a, b, [](const ComplexMatrix& x, const ComplexMatrix& y) -> ComplexMatrix { return x * y; });
}
MatrixField operator*(const StepFunction& c, const MatrixField& x) {
  if (c.size() != x.atoms()) throw Error(ErrorCode::DimensionMismatch, "central scalar over a different space");
  std::vector<ComplexMatrix> out(x.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[i] * x.fiber(i);
  return MatrixField(x.bundle(), std::move(out));
}

// ProjectionField -------------------------------------------------------------

ProjectionField::ProjectionField(MatrixField p, double tol) : p_(std::move(p)) {
  for (std::size_t a = 0; a < p_.atoms(); ++a) {
    const auto& x = p_.fiber(a);
    if (x.size() == 0) continue;
    const double herm = (x - x.adjoint()).cwiseAbs().maxCoeff();
    const double idem = (x * x - x).cwiseAbs().maxCoeff();
    if (!(herm <= tol) || !(idem <= tol)) {
      std::ostringstream msg;
      msg << "fiber " << a << " is not an orthogonal projection (|p - p*| = " << herm << ", |p^2 - p| = " << idem
          << ")";
      throw Error(ErrorCode::NotProjection, msg.str());
    }
  }
}

std::vector<std::size_t> ProjectionField::ranks() const {
  std::vector<std::size_t> out(p_.atoms());
  for (std::size_t a = 0; a < out.size(); ++a) {
    out[a] = static_cast<std::size_t>(std::llround(std::max(0.0, p_.fiber(a).trace().real())));
  }
  return out;
}

ProjectionField ProjectionField::complement() const {
  return ProjectionField(MatrixField::identity(p_.space(), p_.dim()) - p_);
}

// Operations ------------------------------------------------------------------

ProjectionField left_support(const MatrixField& y, double rank_tol) {
  if (!y.all_finite()) throw Error(ErrorCode::NonFinite, "matrix field has non-finite entries");
  std::vector<ComplexMatrix> out(y.atoms());
  for (std::size_t a = 0; a < y.atoms(); ++a) {
    const auto n = static_cast<Eigen::Index>(y.dim());
    out[a] = ComplexMatrix::Zero(n, n);
    if (n == 0) continue;
    const auto svd = detail::fiber_svd(y.fiber(a));
    const auto r = static_cast<Eigen::Index>(detail::numerical_rank(svd.values, rank_tol));
    const ComplexMatrix u = svd.left.leftCols(r);
    out[a] = u * u.adjoint();
  }
  return ProjectionField(MatrixField(y.bundle(), std::move(out)));
}

HomogeneousDecomposition homogeneous_decomposition(const ProjectionField& p) {
  const auto ranks = p.ranks();
  HomogeneousDecomposition out;
  for (std::size_t r = 0; r <= p.field().dim(); ++r) {
    std::vector<bool> mask(ranks.size());
    bool any = false;
    for (std::size_t a = 0; a < ranks.size(); ++a) {
      mask[a] = ranks[a] == r;
      any = any || mask[a];
    }
    if (!any) continue;
    out.ranks.push_back(r);
    out.pieces.emplace_back(std::move(mask));
  }
  return out;
}

Truncation truncation_projection(const MatrixField& x, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "truncation threshold must be positive");
  if (!x.all_finite()) throw Error(ErrorCode::NonFinite, "matrix field has non-finite entries");
  std::vector<ComplexMatrix> out(x.atoms());
  for (std::size_t a = 0; a < x.atoms(); ++a) {
    const auto n = static_cast<Eigen::Index>(x.dim());
    out[a] = ComplexMatrix::Zero(n, n);
    if (n == 0) continue;
    const auto svd = detail::fiber_svd(x.fiber(a));
    for (Eigen::Index i = 0; i < n; ++i) {
      // Strictly below eps: a singular value equal to eps stays out of p.
      if (svd.values(i) < eps) out[a] += svd.right.col(i) * svd.right.col(i).adjoint();
    }
  }
  ProjectionField p(MatrixField(x.bundle(), std::move(out)));
  HomogeneousDecomposition rest = homogeneous_decomposition(p.complement());
  return Truncation{std::move(p), std::move(rest)};
}

MatrixField CentralDiagonalForm::reconstruct() const {
  const auto n = static_cast<Eigen::Index>(bundle->dim());
  MatrixField sum(bundle, std::vector<ComplexMatrix>(bundle->atoms(), ComplexMatrix::Zero(n, n)));
  for (const auto& cls : classes) {
    const StepFunction z = central_partition[cls.rank].as_step_function();
    for (std::size_t i = 0; i < cls.values.size(); ++i) sum = sum + (z * cls.values[i]) * cls.projections[i].field();
  }
  return sum;
}

CentralDiagonalForm diagonalize(const MatrixField& x, const Config& config) {
  if (!x.all_finite()) throw Error(ErrorCode::NonFinite, "matrix field has non-finite entries");
  const SpectralDecomposition spectrum = eigendecompose(x.as_operator(), config);
  CentralDiagonalForm form{x.bundle(), spectrum.rank_partition, {}};
  for (const auto& cls : spectrum.classes) {
    DiagonalClass out;
    out.rank = cls.rank;
    out.values = cls.eigenvalues;
    out.vectors = cls.vectors;
    for (const auto& xi : cls.vectors) {
      // Unit weights, so xi (x) xi is the fiberwise xi xi^H.
      out.projections.emplace_back(MatrixField(x.bundle(), rank_one(xi, xi).fiber_maps()));
    }
    form.classes.push_back(std::move(out));
  }
  return form;
}

DiagonalMatrixForm to_diagonal_matrix(const CentralDiagonalForm& form) {
  const std::size_t atoms = form.bundle->atoms();
  const auto n = static_cast<Eigen::Index>(form.bundle->dim());
  std::vector<ComplexMatrix> unitary(atoms, ComplexMatrix::Identity(n, n));
  std::vector<ComplexMatrix> diagonal(atoms, ComplexMatrix::Zero(n, n));
  for (std::size_t a = 0; a < atoms; ++a) {
    const std::size_t k = form.central_partition.part_of(a);
    const DiagonalClass* cls = nullptr;
    for (const auto& c : form.classes) {
      if (c.rank == k) cls = &c;
    }
    if (cls == nullptr) continue;  // z_0: x vanishes here, U = 1 and D = 0
    const auto r = static_cast<Eigen::Index>(k);
    ComplexMatrix basis(n, r);
    for (Eigen::Index i = 0; i < r; ++i) {
      basis.col(i) = cls->vectors[static_cast<std::size_t>(i)].fiber(a);
      diagonal[a](i, i) = cls->values[static_cast<std::size_t>(i)][a];
    }
    ComplexMatrix u(n, n);
    u.leftCols(r) = basis;
    if (r < n) {
      // Orthonormal completion from the Householder factor of the basis.
      const ComplexMatrix q = Eigen::HouseholderQR<ComplexMatrix>(basis).householderQ();
      u.rightCols(n - r) = q.rightCols(n - r);
      for (Eigen::Index i = r; i < n; ++i) detail::fix_phase(u.col(i));
    }
    unitary[a] = std::move(u);
  }
  return {MatrixField(form.bundle, std::move(unitary)), MatrixField(form.bundle, std::move(diagonal))};
}

StepFunction diagonal_residual(const MatrixField& x, const DiagonalMatrixForm& form) {
  const MatrixField r = form.unitary.adjoint() * x * form.unitary - form.diagonal;
  return fiber_norms(r.as_operator());
}

}  // namespace kaplansky
