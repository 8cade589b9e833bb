#pragma once

// Random instance generators and independent oracles for the test suites.
// The oracles deliberately avoid the library's fiber routines: eigenvalues
// come from the general (non-Hermitian) complex eigensolver applied to the
// quadrature-absorbed matrix, and sorting is a plain per-atom std::sort.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "kaplansky/bundle.hpp"
#include "kaplansky/pie.hpp"

namespace kaplansky::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double gauss() { return normal_(engine_); }
  Complex cgauss() { return {gauss(), gauss()}; }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }
  bool coin() { return index(0, 1) == 1; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

inline std::vector<std::string> names(std::size_t n, const char* prefix) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Atoms with random masses and a grid with random quadrature weights in
/// [0.5, 1.5].
inline BundlePtr random_bundle(Rng& rng, std::size_t atoms, std::size_t dim) {
  std::vector<double> mu(atoms);
  std::vector<double> w(dim);
  for (auto& x : mu) x = rng.uniform(0.1, 2.0);
  for (auto& x : w) x = rng.uniform(0.5, 1.5);
  return make_bundle(MeasureSpace(names(atoms, "w"), mu), SGrid(names(dim, "s"), w));
}

inline ComplexMatrix random_matrix(Rng& rng, std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  ComplexMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.cgauss();
  return a;
}

inline ComplexMatrix random_hermitian(Rng& rng, std::size_t n) {
  const ComplexMatrix a = random_matrix(rng, n);
  return 0.5 * (a + a.adjoint());
}

inline ModuleElement random_element(Rng& rng, const BundlePtr& bundle) {
  std::vector<ComplexVector> fibers(bundle->atoms(), ComplexVector(static_cast<Eigen::Index>(bundle->dim())));
  for (auto& f : fibers)
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = rng.cgauss();
  return ModuleElement(bundle, std::move(fibers));
}

inline StepFunction random_step(Rng& rng, std::size_t atoms) {
  std::vector<Complex> v(atoms);
  for (auto& z : v) z = rng.cgauss();
  return StepFunction(std::move(v));
}

inline BundleOperator random_operator(Rng& rng, const BundlePtr& bundle) {
  std::vector<ComplexMatrix> maps;
  for (std::size_t a = 0; a < bundle->atoms(); ++a) maps.push_back(random_matrix(rng, bundle->dim()));
  return BundleOperator(bundle, std::move(maps));
}

/// Hermitian kernel samples (unit complex Gaussian, Hermitized).
inline KernelBundle random_kernel(Rng& rng, const BundlePtr& bundle) {
  std::vector<ComplexMatrix> samples;
  for (std::size_t a = 0; a < bundle->atoms(); ++a) samples.push_back(random_hermitian(rng, bundle->dim()));
  return KernelBundle(bundle, std::move(samples), true);
}

/// Self-adjoint operator for the quadrature inner product: A = K W with K
/// Hermitian.
inline BundleOperator random_selfadjoint(Rng& rng, const BundlePtr& bundle) {
  return build_operator(random_kernel(rng, bundle));
}

// ---------------------------------------------------------------------------
// Oracles

/// Descending-|.| order, positive value first when magnitudes tie.
inline bool signed_order(double a, double b) {
  if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
  return a > b;
}

/// Signed merge oracle: the nonzero eigenvalues of a fiber map (quadrature
/// absorbed, self-adjoint for the weighted product), via the general complex
/// eigensolver, sorted by signed_order. Values with |mu| <= rank_tol * max
/// are dropped.
inline std::vector<double> oracle_signed_spectrum(const ComplexMatrix& a, double rank_tol) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, false);
  std::vector<double> mu;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) mu.push_back(solver.eigenvalues()(i).real());
  double scale = 0.0;
  for (double x : mu) scale = std::max(scale, std::abs(x));
  std::vector<double> kept;
  for (double x : mu) {
    if (scale > 0.0 && std::abs(x) > rank_tol * scale) kept.push_back(x);
  }
  std::sort(kept.begin(), kept.end(), signed_order);
  return kept;
}

/// Merge of two per-atom sorted lists by descending magnitude, negatives
/// carrying sign, positive first on ties.
inline std::vector<double> oracle_merge(std::vector<double> pos, const std::vector<double>& neg_magnitudes) {
  for (double m : neg_magnitudes) pos.push_back(-m);
  std::stable_sort(pos.begin(), pos.end(), signed_order);
  return pos;
}

/// Singular values of a fiber map for the weighted product, from the
/// eigenvalues of A* A = W^{-1} A^H W A (general eigensolver).
inline std::vector<double> oracle_singular_values(const ComplexMatrix& a, const std::vector<double>& weights) {
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  const ComplexMatrix star = w.cwiseInverse().cast<Complex>().asDiagonal() * a.adjoint() * w.cast<Complex>().asDiagonal();
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(star * a, false);
  std::vector<double> s;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) s.push_back(std::sqrt(std::max(0.0, solver.eigenvalues()(i).real())));
  std::sort(s.rbegin(), s.rend());
  return s;
}

/// Brute-force solvability: per atom, branch labels (rank, n) of every fiber
/// eigenvalue within solve_tol of lambda, plus the zero branch {0,0} on
/// rank-deficient atoms with |lambda| <= solve_tol. Returns the mask of the
/// canonical witness (largest, then smallest label), empty if none.
struct OracleWitness {
  bool solvable = false;
  Branch branch;
  std::vector<bool> mask;
};

inline OracleWitness oracle_solvability(const KernelBundle& kernel, const StepFunction& lambda, double rank_tol,
                                        double solve_tol) {
  const BundleOperator t = build_operator(kernel);
  const std::size_t m = kernel.bundle()->dim();
  std::map<Branch, std::vector<bool>> masks;
  for (std::size_t a = 0; a < t.atoms(); ++a) {
    const auto spectrum = oracle_signed_spectrum(t.fiber(a), rank_tol);
    const std::size_t r = spectrum.size();
    const double l = lambda[a].real();
    for (std::size_t n = 0; n < r; ++n) {
      if (std::abs(l - spectrum[n]) <= solve_tol) {
        auto& mask = masks.try_emplace(Branch{r, n + 1}, t.atoms(), false).first->second;
        mask[a] = true;
      }
    }
    if (r < m && std::abs(l) <= solve_tol) {
      auto& mask = masks.try_emplace(kZeroBranch, t.atoms(), false).first->second;
      mask[a] = true;
    }
  }
  OracleWitness best;
  std::size_t best_count = 0;
  for (const auto& [branch, mask] : masks) {  // ascending branch order
    const auto count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    if (count > best_count) {
      best = {true, branch, mask};
      best_count = count;
    }
  }
  return best;
}

/// Phase-insensitive distance between two fiber vectors: min over unit c of
/// |u - c v|, computed from |<u, v>|.
inline double phase_distance(const ComplexVector& u, const ComplexVector& v) {
  const Complex ip = v.dot(u);
  const Complex c = std::abs(ip) > 0 ? ip / std::abs(ip) : Complex(1.0);
  return (u - c * v).norm();
}

}  // namespace kaplansky::testing
