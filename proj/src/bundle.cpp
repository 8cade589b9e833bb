#include "kaplansky/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fiber.hpp"
#include "parallel.hpp"

namespace kaplansky {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::InvalidPartition: return "invalid partition of unity";
    case ErrorCode::NotSelfAdjoint: return "operator is not self-adjoint";
    case ErrorCode::NotPositive: return "operator is not positive";
    case ErrorCode::NotProjection: return "field is not a projection";
    case ErrorCode::NotReal: return "function is not real-valued";
    case ErrorCode::MalformedParts: return "malformed signed sequence pair";
    case ErrorCode::NotSolvable: return "equation is not solvable";
    case ErrorCode::Inconsistent: return "internal tolerance inconsistency";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Schema: return "schema error";
  }
  return "unknown error";
}

void Config::validate() const {
  if (!(rank_tol > 0.0) || !(solve_tol > 0.0) || !(equality_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be strictly positive");
  }
}

namespace {

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

void check_weights(const std::vector<double>& weights, const char* what) {
  for (double w : weights) {
    require(std::isfinite(w) && w > 0.0, ErrorCode::InvalidArgument,
            std::string(what) + " must be finite and strictly positive");
  }
}

void check_same(const Bundle& a, const Bundle& b) {
  require(compatible(a, b), ErrorCode::DimensionMismatch, "operands live over different bundles");
}

std::vector<std::string> numbered(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

}  // namespace

// MeasureSpace / SGrid ------------------------------------------------------

MeasureSpace::MeasureSpace(std::vector<std::string> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  require(atoms_.size() == weights_.size(), ErrorCode::DimensionMismatch,
          "measure space needs one weight per atom");
  require(!atoms_.empty(), ErrorCode::InvalidArgument, "measure space needs at least one atom");
  check_weights(weights_, "atom weights");
  std::set<std::string> seen(atoms_.begin(), atoms_.end());
  require(seen.size() == atoms_.size(), ErrorCode::InvalidArgument, "atom identifiers must be unique");
}

MeasureSpace MeasureSpace::uniform(std::size_t atom_count) {
  return MeasureSpace(numbered(atom_count), std::vector<double>(atom_count, 1.0));
}

SGrid::SGrid(std::vector<std::string> points, std::vector<double> quad_weights)
    : points_(std::move(points)), quad_weights_(std::move(quad_weights)) {
  require(points_.size() == quad_weights_.size(), ErrorCode::DimensionMismatch,
          "grid needs one quadrature weight per point");
  require(!points_.empty(), ErrorCode::InvalidArgument, "grid needs at least one point");
  check_weights(quad_weights_, "quadrature weights");
}

SGrid SGrid::unit(std::size_t dim) { return SGrid(numbered(dim), std::vector<double>(dim, 1.0)); }

BundlePtr make_bundle(MeasureSpace space, SGrid grid) {
  return std::make_shared<const Bundle>(Bundle{std::move(space), std::move(grid)});
}

bool compatible(const Bundle& a, const Bundle& b) {
  if (&a == &b) return true;
  return a.space.size() == b.space.size() && a.grid.quad_weights() == b.grid.quad_weights();
}

// StepFunction ----------------------------------------------------------------

StepFunction::StepFunction(std::vector<Complex> values) : values_(std::move(values)) {}

StepFunction StepFunction::constant(std::size_t atoms, Complex value) {
  return StepFunction(std::vector<Complex>(atoms, value));
}

namespace {

template <class Op>
StepFunction pointwise(const StepFunction& a, Op op) {
  std::vector<Complex> out(a.size());
  std::transform(a.values().begin(), a.values().end(), out.begin(), op);
  return StepFunction(std::move(out));
}

template <class Op>
StepFunction pointwise(const StepFunction& a, const StepFunction& b, Op op) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "step functions over different spaces");
  std::vector<Complex> out(a.size());
  std::transform(a.values().begin(), a.values().end(), b.values().begin(), out.begin(), op);
  return StepFunction(std::move(out));
}

}  // namespace

StepFunction StepFunction::conj() const {
  return pointwise(*this, [](Complex z) { return std::conj(z); });
}

StepFunction StepFunction::abs() const {
  return pointwise(*this, [](Complex z) { return Complex(std::abs(z), 0.0); });
}

StepFunction StepFunction::sqrt() const {
  return pointwise(*this, [](Complex z) {
    return z.imag() == 0.0 && z.real() >= 0.0 ? Complex(std::sqrt(z.real()), 0.0) : std::sqrt(z);
  });
}

StepFunction StepFunction::positive_part() const {
  return pointwise(*this, [](Complex z) { return Complex(std::max(z.real(), 0.0), 0.0); });
}

double StepFunction::sup_norm() const {
  double m = 0.0;
  for (const auto& z : values_) m = std::max(m, std::abs(z));
  return m;
}

bool StepFunction::is_real(double tol) const {
  return std::all_of(values_.begin(), values_.end(), [tol](Complex z) { return std::abs(z.imag()) <= tol; });
}

bool StepFunction::approx_equal(const StepFunction& other, double tol) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(values_[i] - other.values_[i]) > tol) return false;
  }
  return true;
}

StepFunction operator+(const StepFunction& a, const StepFunction& b) {
  return pointwise(a, b, std::plus<>{});
}
StepFunction operator-(const StepFunction& a, const StepFunction& b) {
  return pointwise(a, b, std::minus<>{});
}
StepFunction operator*(const StepFunction& a, const StepFunction& b) {
  return pointwise(a, b, std::multiplies<>{});
}
StepFunction operator*(Complex c, const StepFunction& a) {
  return pointwise(a, [c](Complex z) { return c * z; });
}
StepFunction operator-(const StepFunction& a) {
  return pointwise(a, [](Complex z) { return -z; });
}

// Idempotent ------------------------------------------------------------------

Idempotent Idempotent::single(std::size_t atoms, std::size_t atom) {
  require(atom < atoms, ErrorCode::InvalidArgument, "atom index out of range");
  std::vector<bool> mask(atoms, false);
  mask[atom] = true;
  return Idempotent(std::move(mask));
}

Idempotent Idempotent::support(const StepFunction& f) {
  std::vector<bool> mask(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) mask[i] = f[i] != Complex(0.0, 0.0);
  return Idempotent(std::move(mask));
}

std::size_t Idempotent::count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

Idempotent Idempotent::complement() const {
  std::vector<bool> mask(mask_.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = !mask_[i];
  return Idempotent(std::move(mask));
}

Idempotent Idempotent::minus(const Idempotent& other) const { return *this & other.complement(); }

bool Idempotent::leq(const Idempotent& other) const {
  require(size() == other.size(), ErrorCode::DimensionMismatch, "idempotents over different spaces");
  for (std::size_t i = 0; i < size(); ++i) {
    if (mask_[i] && !other.mask_[i]) return false;
  }
  return true;
}

StepFunction Idempotent::as_step_function() const {
  std::vector<Complex> values(mask_.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = mask_[i] ? 1.0 : 0.0;
  return StepFunction(std::move(values));
}

Idempotent operator&(const Idempotent& a, const Idempotent& b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "idempotents over different spaces");
  std::vector<bool> mask(a.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = a[i] && b[i];
  return Idempotent(std::move(mask));
}

Idempotent operator|(const Idempotent& a, const Idempotent& b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "idempotents over different spaces");
  std::vector<bool> mask(a.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = a[i] || b[i];
  return Idempotent(std::move(mask));
}

// PartitionOfUnity ------------------------------------------------------------

PartitionOfUnity::PartitionOfUnity(std::vector<Idempotent> parts) : parts_(std::move(parts)) {
  require(!parts_.empty(), ErrorCode::InvalidPartition, "partition of unity needs at least one part");
  const std::size_t n = parts_.front().size();
  std::vector<int> hits(n, 0);
  for (const auto& p : parts_) {
    require(p.size() == n, ErrorCode::InvalidPartition, "partition parts over different spaces");
    for (std::size_t i = 0; i < n; ++i) hits[i] += p[i] ? 1 : 0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (hits[i] != 1) {
      std::ostringstream msg;
      msg << "atom " << i << (hits[i] == 0 ? " is not covered" : " lies in several parts");
      throw Error(ErrorCode::InvalidPartition, msg.str());
    }
  }
}

std::size_t PartitionOfUnity::part_of(std::size_t atom) const {
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    if (parts_[k][atom]) return k;
  }
  throw Error(ErrorCode::InvalidPartition, "atom not covered");
}

// ModuleElement ---------------------------------------------------------------

ModuleElement::ModuleElement(BundlePtr bundle, std::vector<ComplexVector> fibers)
    : bundle_(std::move(bundle)), fibers_(std::move(fibers)) {
  require(bundle_ != nullptr, ErrorCode::InvalidArgument, "module element needs a bundle");
  require(fibers_.size() == bundle_->atoms(), ErrorCode::DimensionMismatch,
          "module element needs one fiber per atom");
  for (const auto& f : fibers_) {
    require(static_cast<std::size_t>(f.size()) == bundle_->dim(), ErrorCode::DimensionMismatch,
            "fiber length differs from the grid size");
  }
}

ModuleElement ModuleElement::zero(BundlePtr bundle) {
  const auto dim = static_cast<Eigen::Index>(bundle->dim());
  std::vector<ComplexVector> fibers(bundle->atoms(), ComplexVector::Zero(dim));
  return ModuleElement(std::move(bundle), std::move(fibers));
}

ModuleElement ModuleElement::constant(BundlePtr bundle, const ComplexVector& fiber) {
  std::vector<ComplexVector> fibers(bundle->atoms(), fiber);
  return ModuleElement(std::move(bundle), std::move(fibers));
}

ModuleElement ModuleElement::basis(BundlePtr bundle, std::size_t index) {
  require(index < bundle->dim(), ErrorCode::InvalidArgument, "basis index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(bundle->dim()));
  v(static_cast<Eigen::Index>(index)) = 1.0 / std::sqrt(bundle->grid.quad_weights()[index]);
  return constant(std::move(bundle), v);
}

ModuleElement ModuleElement::restricted(const Idempotent& pi) const {
  require(pi.size() == atoms(), ErrorCode::DimensionMismatch, "idempotent over a different space");
  std::vector<ComplexVector> out = fibers_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!pi[i]) out[i].setZero();
  }
  return ModuleElement(bundle_, std::move(out));
}

ModuleElement operator+(const ModuleElement& a, const ModuleElement& b) {
  check_same(*a.bundle(), *b.bundle());
  std::vector<ComplexVector> out(a.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.fiber(i) + b.fiber(i);
  return ModuleElement(a.bundle(), std::move(out));
}

ModuleElement operator-(const ModuleElement& a, const ModuleElement& b) {
  check_same(*a.bundle(), *b.bundle());
  std::vector<ComplexVector> out(a.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.fiber(i) - b.fiber(i);
  return ModuleElement(a.bundle(), std::move(out));
}

ModuleElement operator*(const StepFunction& a, const ModuleElement& xi) {
  require(a.size() == xi.atoms(), ErrorCode::DimensionMismatch, "step function over a different space");
  std::vector<ComplexVector> out(xi.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * xi.fiber(i);
  return ModuleElement(xi.bundle(), std::move(out));
}

ModuleElement operator*(Complex c, const ModuleElement& xi) {
  std::vector<ComplexVector> out(xi.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * xi.fiber(i);
  return ModuleElement(xi.bundle(), std::move(out));
}

// BundleOperator --------------------------------------------------------------

BundleOperator::BundleOperator(BundlePtr bundle, std::vector<ComplexMatrix> fiber_maps)
    : bundle_(std::move(bundle)), maps_(std::move(fiber_maps)) {
  require(bundle_ != nullptr, ErrorCode::InvalidArgument, "operator needs a bundle");
  require(maps_.size() == bundle_->atoms(), ErrorCode::DimensionMismatch, "operator needs one map per atom");
  const auto m = static_cast<Eigen::Index>(bundle_->dim());
  for (const auto& a : maps_) {
    require(a.rows() == m && a.cols() == m, ErrorCode::DimensionMismatch, "fiber map is not grid-size square");
  }
}

BundleOperator BundleOperator::zero(BundlePtr bundle) {
  const auto m = static_cast<Eigen::Index>(bundle->dim());
  std::vector<ComplexMatrix> maps(bundle->atoms(), ComplexMatrix::Zero(m, m));
  return BundleOperator(std::move(bundle), std::move(maps));
}

BundleOperator BundleOperator::identity(BundlePtr bundle) {
  const auto m = static_cast<Eigen::Index>(bundle->dim());
  std::vector<ComplexMatrix> maps(bundle->atoms(), ComplexMatrix::Identity(m, m));
  return BundleOperator(std::move(bundle), std::move(maps));
}

BundleOperator BundleOperator::restricted(const Idempotent& pi) const {
  require(pi.size() == atoms(), ErrorCode::DimensionMismatch, "idempotent over a different space");
  std::vector<ComplexMatrix> out = maps_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!pi[i]) out[i].setZero();
  }
  return BundleOperator(bundle_, std::move(out));
}

bool BundleOperator::all_finite() const {
  return std::all_of(maps_.begin(), maps_.end(), [](const ComplexMatrix& a) { return a.allFinite(); });
}

BundleOperator operator+(const BundleOperator& a, const BundleOperator& b) {
  check_same(*a.bundle(), *b.bundle());
  std::vector<ComplexMatrix> out(a.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.fiber(i) + b.fiber(i);
  return BundleOperator(a.bundle(), std::move(out));
}

BundleOperator operator-(const BundleOperator& a, const BundleOperator& b) {
  check_same(*a.bundle(), *b.bundle());
  std::vector<ComplexMatrix> out(a.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.fiber(i) - b.fiber(i);
  return BundleOperator(a.bundle(), std::move(out));
}

BundleOperator operator*(const StepFunction& a, const BundleOperator& t) {
  require(a.size() == t.atoms(), ErrorCode::DimensionMismatch, "step function over a different space");
  std::vector<ComplexMatrix> out(t.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * t.fiber(i);
  return BundleOperator(t.bundle(), std::move(out));
}

// Module operations -----------------------------------------------------------

StepFunction inner_product(const ModuleElement& xi, const ModuleElement& eta) {
  check_same(*xi.bundle(), *eta.bundle());
  const auto& w = xi.bundle()->grid.quad_weights();
  std::vector<Complex> out(xi.atoms());
  for (std::size_t a = 0; a < out.size(); ++a) {
    const auto& x = xi.fiber(a);
    const auto& y = eta.fiber(a);
    Complex sum = 0.0;
    for (Eigen::Index s = 0; s < x.size(); ++s) sum += w[static_cast<std::size_t>(s)] * x(s) * std::conj(y(s));
    out[a] = sum;
  }
  return StepFunction(std::move(out));
}

StepFunction vector_norm(const ModuleElement& xi) {
  const auto& w = xi.bundle()->grid.quad_weights();
  std::vector<Complex> out(xi.atoms());
  for (std::size_t a = 0; a < out.size(); ++a) {
    double sum = 0.0;
    const auto& x = xi.fiber(a);
    for (Eigen::Index s = 0; s < x.size(); ++s) sum += w[static_cast<std::size_t>(s)] * std::norm(x(s));
    out[a] = std::sqrt(sum);
  }
  return StepFunction(std::move(out));
}

double module_norm(const ModuleElement& xi) { return vector_norm(xi).sup_norm(); }

ModuleElement mix(const PartitionOfUnity& partition, std::span<const ModuleElement> elements) {
  require(partition.size() == elements.size(), ErrorCode::DimensionMismatch,
          "mix needs one element per partition part");
  const ModuleElement& first = elements.front();
  require(partition.atoms() == first.atoms(), ErrorCode::DimensionMismatch, "partition over a different space");
  for (const auto& e : elements) check_same(*first.bundle(), *e.bundle());
  std::vector<ComplexVector> out(first.atoms());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = elements[partition.part_of(a)].fiber(a);
  return ModuleElement(first.bundle(), std::move(out));
}

StepFunction mix(const PartitionOfUnity& partition, std::span<const StepFunction> functions) {
  require(partition.size() == functions.size(), ErrorCode::DimensionMismatch,
          "mix needs one function per partition part");
  std::vector<Complex> out(partition.atoms());
  for (const auto& f : functions) {
    require(f.size() == out.size(), ErrorCode::DimensionMismatch, "step function over a different space");
  }
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = functions[partition.part_of(a)][a];
  return StepFunction(std::move(out));
}

ModuleElement apply(const BundleOperator& t, const ModuleElement& xi) {
  check_same(*t.bundle(), *xi.bundle());
  std::vector<ComplexVector> out(xi.atoms());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = t.fiber(a) * xi.fiber(a);
  return ModuleElement(xi.bundle(), std::move(out));
}

BundleOperator rank_one(const ModuleElement& xi, const ModuleElement& eta) {
  check_same(*xi.bundle(), *eta.bundle());
  const auto& w = xi.bundle()->grid.quad_weights();
  const Eigen::Map<const Eigen::VectorXd> weights(w.data(), static_cast<Eigen::Index>(w.size()));
  std::vector<ComplexMatrix> out(xi.atoms());
  for (std::size_t a = 0; a < out.size(); ++a) {
    // zeta -> xi * (eta^H W zeta)
    out[a] = xi.fiber(a) * (eta.fiber(a).adjoint() * weights.cast<Complex>().asDiagonal());
  }
  return BundleOperator(xi.bundle(), std::move(out));
}

BundleOperator adjoint(const BundleOperator& t) {
  const auto& w = t.bundle()->grid.quad_weights();
  const Eigen::Map<const Eigen::VectorXd> weights(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::VectorXcd wc = weights.cast<Complex>();
  const Eigen::VectorXcd winv = weights.cwiseInverse().cast<Complex>();
  std::vector<ComplexMatrix> out(t.atoms());
  for (std::size_t a = 0; a < out.size(); ++a) {
    out[a] = winv.asDiagonal() * t.fiber(a).adjoint() * wc.asDiagonal();
  }
  return BundleOperator(t.bundle(), std::move(out));
}

StepFunction fiber_norms(const BundleOperator& t, const Config& config) {
  const Eigen::VectorXd sw = detail::sqrt_weights(t.bundle()->grid);
  std::vector<Complex> out(t.atoms(), 0.0);
  detail::for_each_atom(t.atoms(), config.parallelism, [&](std::size_t a) {
    if (t.dim() == 0) return;
    const auto svd = detail::fiber_svd(detail::to_euclidean(t.fiber(a), sw));
    out[a] = svd.values(0);
  });
  return StepFunction(std::move(out));
}

double operator_norm(const BundleOperator& t, const Config& config) {
  return fiber_norms(t, config).sup_norm();
}

double selfadjoint_residual(const BundleOperator& t, const Config& config) {
  return operator_norm(t - adjoint(t), config);
}

}  // namespace kaplansky
