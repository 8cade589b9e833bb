#pragma once

// Finite model of a Hilbert-Kaplansky module: an atomic measure space Omega,
// the algebra of step functions over it, its idempotent lattice, and the
// module L^{2,inf}(S x Omega) sampled on a quadrature grid over S.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kaplansky/config.hpp"
#include "kaplansky/error.hpp"

namespace kaplansky {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Atoms of Omega with their (strictly positive) masses.
class MeasureSpace {
 public:
  MeasureSpace(std::vector<std::string> atoms, std::vector<double> weights);

  /// Atoms named "0", "1", ... with unit mass.
  static MeasureSpace uniform(std::size_t atom_count);

  std::size_t size() const noexcept { return atoms_.size(); }
  const std::vector<std::string>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  bool operator==(const MeasureSpace&) const = default;

 private:
  std::vector<std::string> atoms_;
  std::vector<double> weights_;
};

/// Quadrature grid over S; the L^2(S) inner product is the weighted dot
/// product with these weights.
class SGrid {
 public:
  SGrid(std::vector<std::string> points, std::vector<double> quad_weights);

  /// n points with unit weight (the plain Euclidean inner product).
  static SGrid unit(std::size_t dim);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<std::string>& points() const noexcept { return points_; }
  const std::vector<double>& quad_weights() const noexcept { return quad_weights_; }

  bool operator==(const SGrid&) const = default;

 private:
  std::vector<std::string> points_;
  std::vector<double> quad_weights_;
};

/// An element of L^inf(Omega): one complex value per atom.
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(std::vector<Complex> values);

  static StepFunction constant(std::size_t atoms, Complex value);
  static StepFunction zero(std::size_t atoms) { return constant(atoms, 0.0); }

  std::size_t size() const noexcept { return values_.size(); }
  const Complex& operator[](std::size_t atom) const { return values_[atom]; }
  const std::vector<Complex>& values() const noexcept { return values_; }

  StepFunction conj() const;
  StepFunction abs() const;
  /// Componentwise principal square root.
  StepFunction sqrt() const;
  /// Positive part of the real part, f_+ = max(Re f, 0).
  StepFunction positive_part() const;

  /// Maximum modulus over atoms (the L^inf norm in the atomic model).
  double sup_norm() const;
  bool is_real(double tol) const;
  bool approx_equal(const StepFunction& other, double tol) const;

  friend StepFunction operator+(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator-(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator*(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator*(Complex c, const StepFunction& a);
  friend StepFunction operator-(const StepFunction& a);
  bool operator==(const StepFunction&) const = default;

 private:
  std::vector<Complex> values_;
};

/// An idempotent of L^inf(Omega), i.e. the indicator of a set of atoms.
class Idempotent {
 public:
  Idempotent() = default;
  explicit Idempotent(std::vector<bool> mask) : mask_(std::move(mask)) {}

  static Idempotent full(std::size_t atoms) { return Idempotent(std::vector<bool>(atoms, true)); }
  static Idempotent empty(std::size_t atoms) { return Idempotent(std::vector<bool>(atoms, false)); }
  static Idempotent single(std::size_t atoms, std::size_t atom);
  /// c(f): the indicator of {omega : f(omega) != 0}. Exact, no tolerance.
  static Idempotent support(const StepFunction& f);

  std::size_t size() const noexcept { return mask_.size(); }
  bool operator[](std::size_t atom) const { return mask_[atom]; }
  const std::vector<bool>& mask() const noexcept { return mask_; }
  std::size_t count() const;
  bool any() const { return count() > 0; }

  /// pi^perp
  Idempotent complement() const;
  /// pi and not other; equals pi - other whenever other <= pi.
  Idempotent minus(const Idempotent& other) const;
  bool leq(const Idempotent& other) const;
  StepFunction as_step_function() const;

  friend Idempotent operator&(const Idempotent& a, const Idempotent& b);
  friend Idempotent operator|(const Idempotent& a, const Idempotent& b);
  bool operator==(const Idempotent&) const = default;

 private:
  std::vector<bool> mask_;
};

/// Pairwise disjoint idempotents covering every atom. Empty parts are allowed.
class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(std::vector<Idempotent> parts);

  std::size_t size() const noexcept { return parts_.size(); }
  std::size_t atoms() const noexcept { return parts_.empty() ? 0 : parts_.front().size(); }
  const Idempotent& operator[](std::size_t i) const { return parts_[i]; }
  const std::vector<Idempotent>& parts() const noexcept { return parts_; }

  /// Index of the part containing the atom.
  std::size_t part_of(std::size_t atom) const;

 private:
  std::vector<Idempotent> parts_;
};

/// Omega together with the S-grid; shared by every element and operator
/// built over it.
struct Bundle {
  MeasureSpace space;
  SGrid grid;

  std::size_t atoms() const noexcept { return space.size(); }
  std::size_t dim() const noexcept { return grid.size(); }
};

using BundlePtr = std::shared_ptr<const Bundle>;

BundlePtr make_bundle(MeasureSpace space, SGrid grid);
bool compatible(const Bundle& a, const Bundle& b);

/// An element of L^{2,inf}(S x Omega): one grid vector per atom.
class ModuleElement {
 public:
  ModuleElement(BundlePtr bundle, std::vector<ComplexVector> fibers);

  static ModuleElement zero(BundlePtr bundle);
  /// The same grid vector on every atom.
  static ModuleElement constant(BundlePtr bundle, const ComplexVector& fiber);
  /// delta_i / sqrt(w_i) on every atom; these are orthonormal for the
  /// quadrature inner product.
  static ModuleElement basis(BundlePtr bundle, std::size_t index);

  const BundlePtr& bundle() const noexcept { return bundle_; }
  std::size_t atoms() const noexcept { return fibers_.size(); }
  std::size_t dim() const noexcept { return bundle_->dim(); }
  const ComplexVector& fiber(std::size_t atom) const { return fibers_[atom]; }
  const std::vector<ComplexVector>& fibers() const noexcept { return fibers_; }

  /// pi * xi
  ModuleElement restricted(const Idempotent& pi) const;

  friend ModuleElement operator+(const ModuleElement& a, const ModuleElement& b);
  friend ModuleElement operator-(const ModuleElement& a, const ModuleElement& b);
  friend ModuleElement operator*(const StepFunction& a, const ModuleElement& xi);
  friend ModuleElement operator*(Complex c, const ModuleElement& xi);

 private:
  BundlePtr bundle_;
  std::vector<ComplexVector> fibers_;
};

/// An L^inf(Omega)-linear operator, stored fiberwise with the quadrature
/// weights already absorbed: applying it is a plain matrix-vector product.
class BundleOperator {
 public:
  BundleOperator(BundlePtr bundle, std::vector<ComplexMatrix> fiber_maps);

  static BundleOperator zero(BundlePtr bundle);
  static BundleOperator identity(BundlePtr bundle);

  const BundlePtr& bundle() const noexcept { return bundle_; }
  std::size_t atoms() const noexcept { return maps_.size(); }
  std::size_t dim() const noexcept { return bundle_->dim(); }
  const ComplexMatrix& fiber(std::size_t atom) const { return maps_[atom]; }
  const std::vector<ComplexMatrix>& fiber_maps() const noexcept { return maps_; }

  BundleOperator restricted(const Idempotent& pi) const;
  bool all_finite() const;

  friend BundleOperator operator+(const BundleOperator& a, const BundleOperator& b);
  friend BundleOperator operator-(const BundleOperator& a, const BundleOperator& b);
  /// Central scaling: atom omega's fiber is multiplied by a(omega).
  friend BundleOperator operator*(const StepFunction& a, const BundleOperator& t);

 private:
  BundlePtr bundle_;
  std::vector<ComplexMatrix> maps_;
};

StepFunction inner_product(const ModuleElement& xi, const ModuleElement& eta);
StepFunction vector_norm(const ModuleElement& xi);
double module_norm(const ModuleElement& xi);

/// The element agreeing with elements[i] on partition[i].
ModuleElement mix(const PartitionOfUnity& partition, std::span<const ModuleElement> elements);
/// Atomwise splice of step functions along a partition.
StepFunction mix(const PartitionOfUnity& partition, std::span<const StepFunction> functions);

ModuleElement apply(const BundleOperator& t, const ModuleElement& xi);
/// (xi (x) eta)(zeta) = <zeta, eta> xi
BundleOperator rank_one(const ModuleElement& xi, const ModuleElement& eta);
/// Adjoint for the quadrature inner product, W^{-1} A^H W per fiber.
BundleOperator adjoint(const BundleOperator& t);

/// Spectral norm of each fiber map for the quadrature inner product.
StepFunction fiber_norms(const BundleOperator& t, const Config& config = {});
/// Max over fibers of the quadrature spectral norm.
double operator_norm(const BundleOperator& t, const Config& config = {});
/// operator_norm(T - T*).
double selfadjoint_residual(const BundleOperator& t, const Config& config = {});

}  // namespace kaplansky
