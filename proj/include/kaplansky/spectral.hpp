#pragma once

// Cyclic Schmidt decomposition of bundle operators and the spectral
// representation of self-adjoint ones, built by splicing the positive and
// negative eigen-sequences together with idempotents.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "kaplansky/bundle.hpp"

namespace kaplansky {

/// Terms of rank class k: singular values f_{k,1} >= ... >= f_{k,k} > 0 on
/// pi_k (zero elsewhere) with left/right families orthonormal on pi_k.
struct SchmidtClass {
  std::size_t rank = 0;
  std::vector<StepFunction> values;
  std::vector<ModuleElement> left;
  std::vector<ModuleElement> right;
};

struct CyclicDecomposition {
  BundlePtr bundle;
  /// Part k collects the atoms whose fiber has numerical rank k, k = 0..m.
  PartitionOfUnity rank_partition;
  /// Nonempty classes with k >= 1, ascending in k.
  std::vector<SchmidtClass> classes;

  /// sum_k pi_k sum_n f_{k,n} xi_{k,n} (x) eta_{k,n}
  BundleOperator reconstruct() const;
};

/// Terms of rank class k of a self-adjoint operator: real eigenvalue step
/// functions with |f_{k,1}| >= ... >= |f_{k,k}| > 0 on pi_k.
struct SpectralClass {
  std::size_t rank = 0;
  std::vector<StepFunction> eigenvalues;
  std::vector<ModuleElement> vectors;
};

struct SpectralDecomposition {
  BundlePtr bundle;
  PartitionOfUnity rank_partition;
  std::vector<SpectralClass> classes;

  /// sum_k pi_k sum_n f_{k,n} xi_{k,n} (x) xi_{k,n}
  BundleOperator reconstruct() const;
  const SpectralClass* find_class(std::size_t rank) const;
};

/// One eigenpair of a fiber: a strictly positive magnitude and its vector
/// in module coordinates.
struct SignedTerm {
  double value = 0.0;
  ComplexVector vector;
};

/// T = T_+ - T_- with T_+ T_- = 0, as per-atom lists sorted nonincreasing.
/// `neg` holds the magnitudes of the negative eigenvalues.
struct SignedSequencePair {
  BundlePtr bundle;
  std::vector<std::vector<SignedTerm>> pos;
  std::vector<std::vector<SignedTerm>> neg;

  /// Throws MalformedParts when values are nonpositive, unsorted, or
  /// vectors have the wrong length.
  void validate() const;
  /// sum f_n^+ xi_n^+ (x) xi_n^+ - sum f_n^- xi_n^- (x) xi_n^-
  BundleOperator assemble() const;
};

/// The state after inserting one negative term: the chain z_1 <= z_2 <= ...
/// with z_n = c((f^- - |g_n|)_+), and the spliced sequence f^{(1)}.
struct MergeStep {
  std::vector<Idempotent> z;
  std::vector<StepFunction> values;
};

struct MergeTrace {
  std::vector<MergeStep> steps;
};

CyclicDecomposition cyclic_schmidt(const BundleOperator& t, const Config& config = {});

/// Spectral form of a positive operator read off its Schmidt decomposition,
/// T = |T|, so left and right families coincide.
SpectralDecomposition positive_selfadjoint_form(const BundleOperator& t, const Config& config = {});

SignedSequencePair split_parts(const BundleOperator& t, const Config& config = {});

/// Merges the positive and negative sequences by the idempotent splice: each
/// negative term f_j^- is inserted into the running sequence g through
///   g_n' = z_{n-1} g_{n-1} - (z_n - z_{n-1}) f_j^- + z_n^perp g_n
/// and the same mix for the vectors. Ties keep the existing (earlier) term
/// first because (f^- - |g_n|)_+ vanishes at equality.
SpectralDecomposition selfadjoint_merge(const SignedSequencePair& parts, MergeTrace* trace = nullptr);

/// split_parts followed by selfadjoint_merge.
SpectralDecomposition eigendecompose(const BundleOperator& t, const Config& config = {});

struct MergeIdentityReport {
  /// Max module-norm deviation |T_parts v - T_merged v| over the input
  /// eigenvectors xi_k^+ and xi_k^-.
  double test_vector_deviation = 0.0;
  /// Same over random unit elements.
  double random_deviation = 0.0;
  std::size_t test_vectors = 0;

  double max_deviation() const { return std::max(test_vector_deviation, random_deviation); }
};

MergeIdentityReport verify_merge_identity(const SignedSequencePair& parts, const SpectralDecomposition& merged,
                                          std::size_t random_samples = 8, std::uint64_t seed = 0x6b61706cULL);

/// Throws NotSelfAdjoint unless every fiber is Hermitian for the quadrature
/// inner product within equality_tol (scaled by the fiber size when > 1).
void require_selfadjoint(const BundleOperator& t, const Config& config);

/// Per atom in mask, a unit vector spanning the eigen-direction of smallest
/// |eigenvalue| of a self-adjoint fiber; zero elsewhere.
ModuleElement null_directions(const BundleOperator& t, const Idempotent& mask, const Config& config = {});

}  // namespace kaplansky
