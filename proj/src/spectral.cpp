#include "kaplansky/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fiber.hpp"
#include "parallel.hpp"

namespace kaplansky {

namespace {

struct FiberTerms {
  std::vector<double> values;
  std::vector<ComplexVector> left;
  std::vector<ComplexVector> right;
};

PartitionOfUnity partition_by_rank(const std::vector<std::size_t>& ranks, std::size_t max_rank) {
  std::vector<Idempotent> parts(max_rank + 1, Idempotent::empty(ranks.size()));
  std::vector<std::vector<bool>> masks(max_rank + 1, std::vector<bool>(ranks.size(), false));
  for (std::size_t a = 0; a < ranks.size(); ++a) masks[ranks[a]][a] = true;
  for (std::size_t k = 0; k <= max_rank; ++k) parts[k] = Idempotent(std::move(masks[k]));
  return PartitionOfUnity(std::move(parts));
}

StepFunction gather_value(const std::vector<FiberTerms>& terms, const Idempotent& pi, std::size_t n) {
  std::vector<Complex> v(terms.size(), 0.0);
  for (std::size_t a = 0; a < terms.size(); ++a) {
    if (pi[a]) v[a] = terms[a].values[n];
  }
  return StepFunction(std::move(v));
}

ModuleElement gather_vector(const BundlePtr& bundle, const std::vector<FiberTerms>& terms, const Idempotent& pi,
                            std::size_t n, bool left) {
  std::vector<ComplexVector> fibers(terms.size(), ComplexVector::Zero(static_cast<Eigen::Index>(bundle->dim())));
  for (std::size_t a = 0; a < terms.size(); ++a) {
    if (pi[a]) fibers[a] = left ? terms[a].left[n] : terms[a].right[n];
  }
  return ModuleElement(bundle, std::move(fibers));
}

std::vector<std::size_t> ranks_of(const std::vector<FiberTerms>& terms) {
  std::vector<std::size_t> ranks(terms.size());
  for (std::size_t a = 0; a < terms.size(); ++a) ranks[a] = terms[a].values.size();
  return ranks;
}

double largest_entry(const ComplexMatrix& b) { return b.size() == 0 ? 0.0 : b.cwiseAbs().maxCoeff(); }

// Per-fiber terms of a Hermitian Euclidean form B, eigenvalues sorted by
// descending magnitude and split by sign. Vectors are in module coordinates.
struct FiberSplit {
  std::vector<SignedTerm> pos;
  std::vector<SignedTerm> neg;
};

FiberSplit split_fiber(const ComplexMatrix& b, const Eigen::VectorXd& sqrt_w, double rank_tol) {
  FiberSplit out;
  if (b.size() == 0) return out;
  auto eig = detail::hermitian_eigen(b);
  const Eigen::Index m = eig.values.size();
  const double scale = eig.values.cwiseAbs().maxCoeff();
  if (scale == 0.0) return out;
  const double cutoff = rank_tol * scale;
  detail::orthonormalize_clusters(eig.vectors, eig.values, cutoff);
  const Eigen::VectorXd inv_sqrt_w = sqrt_w.cwiseInverse();
  auto to_module = [&](Eigen::Index i) {
    ComplexVector v = inv_sqrt_w.cast<Complex>().asDiagonal() * eig.vectors.col(i);
    detail::fix_phase(v);
    return v;
  };
  // Ascending values: positives from the top, negatives from the bottom.
  for (Eigen::Index i = m - 1; i >= 0 && eig.values(i) > cutoff; --i) out.pos.push_back({eig.values(i), to_module(i)});
  for (Eigen::Index i = 0; i < m && eig.values(i) < -cutoff; ++i) out.neg.push_back({-eig.values(i), to_module(i)});
  return out;
}

}  // namespace

// Decomposition types ---------------------------------------------------------

BundleOperator CyclicDecomposition::reconstruct() const {
  BundleOperator sum = BundleOperator::zero(bundle);
  for (const auto& cls : classes) {
    const StepFunction pi = rank_partition[cls.rank].as_step_function();
    for (std::size_t n = 0; n < cls.values.size(); ++n) {
      sum = sum + (pi * cls.values[n]) * rank_one(cls.left[n], cls.right[n]);
    }
  }
  return sum;
}

BundleOperator SpectralDecomposition::reconstruct() const {
  BundleOperator sum = BundleOperator::zero(bundle);
  for (const auto& cls : classes) {
    const StepFunction pi = rank_partition[cls.rank].as_step_function();
    for (std::size_t n = 0; n < cls.eigenvalues.size(); ++n) {
      sum = sum + (pi * cls.eigenvalues[n]) * rank_one(cls.vectors[n], cls.vectors[n]);
    }
  }
  return sum;
}

const SpectralClass* SpectralDecomposition::find_class(std::size_t rank) const {
  for (const auto& cls : classes) {
    if (cls.rank == rank) return &cls;
  }
  return nullptr;
}

void SignedSequencePair::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::MalformedParts, what); };
  if (!bundle) fail("signed sequence pair has no bundle");
  if (pos.size() != bundle->atoms() || neg.size() != bundle->atoms()) fail("one term list per atom required");
  const auto dim = static_cast<Eigen::Index>(bundle->dim());
  auto check = [&](const std::vector<SignedTerm>& list, const char* side, std::size_t atom) {
    for (std::size_t n = 0; n < list.size(); ++n) {
      std::ostringstream where;
      where << side << " term " << n + 1 << " on atom " << atom;
      if (!(list[n].value > 0.0) || !std::isfinite(list[n].value)) fail(where.str() + " is not a positive number");
      if (n > 0 && list[n].value > list[n - 1].value) fail(where.str() + " breaks the nonincreasing order");
      if (list[n].vector.size() != dim) fail(where.str() + " has a vector of the wrong length");
    }
  };
  for (std::size_t a = 0; a < pos.size(); ++a) {
    check(pos[a], "positive", a);
    check(neg[a], "negative", a);
  }
}

BundleOperator SignedSequencePair::assemble() const {
  const auto m = static_cast<Eigen::Index>(bundle->dim());
  const auto& w = bundle->grid.quad_weights();
  const Eigen::VectorXcd weights = Eigen::Map<const Eigen::VectorXd>(w.data(), m).cast<Complex>();
  std::vector<ComplexMatrix> maps(bundle->atoms(), ComplexMatrix::Zero(m, m));
  for (std::size_t a = 0; a < maps.size(); ++a) {
    for (const auto& t : pos[a]) maps[a] += t.value * t.vector * (t.vector.adjoint() * weights.asDiagonal());
    for (const auto& t : neg[a]) maps[a] -= t.value * t.vector * (t.vector.adjoint() * weights.asDiagonal());
  }
  return BundleOperator(bundle, std::move(maps));
}

// Operations ------------------------------------------------------------------

void require_selfadjoint(const BundleOperator& t, const Config& config) {
  const Eigen::VectorXd sw = detail::sqrt_weights(t.bundle()->grid);
  for (std::size_t a = 0; a < t.atoms(); ++a) {
    const ComplexMatrix b = detail::to_euclidean(t.fiber(a), sw);
    const double defect = detail::hermitian_defect(b);
    const double allowed = config.equality_tol * std::max(1.0, largest_entry(b));
    if (!(defect <= allowed)) {
      std::ostringstream msg;
      msg << "fiber " << a << " deviates from its adjoint by " << defect;
      throw Error(ErrorCode::NotSelfAdjoint, msg.str());
    }
  }
}

CyclicDecomposition cyclic_schmidt(const BundleOperator& t, const Config& config) {
  config.validate();
  if (!t.all_finite()) throw Error(ErrorCode::NonFinite, "operator has non-finite entries");
  const BundlePtr& bundle = t.bundle();
  const Eigen::VectorXd sw = detail::sqrt_weights(bundle->grid);
  const Eigen::VectorXcd inv_sw = sw.cwiseInverse().cast<Complex>();
  std::vector<FiberTerms> terms(t.atoms());
  detail::for_each_atom(t.atoms(), config.parallelism, [&](std::size_t a) {
    if (t.dim() == 0) return;
    const auto svd = detail::fiber_svd(detail::to_euclidean(t.fiber(a), sw));
    const std::size_t r = detail::numerical_rank(svd.values, config.rank_tol);
    for (std::size_t n = 0; n < r; ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      ComplexVector xi = inv_sw.asDiagonal() * svd.left.col(i);
      ComplexVector eta = inv_sw.asDiagonal() * svd.right.col(i);
      eta *= detail::fix_phase(xi);
      terms[a].values.push_back(svd.values(i));
      terms[a].left.push_back(std::move(xi));
      terms[a].right.push_back(std::move(eta));
    }
  });

  CyclicDecomposition out{bundle, partition_by_rank(ranks_of(terms), bundle->dim()), {}};
  for (std::size_t k = 1; k <= bundle->dim(); ++k) {
    const Idempotent& pi = out.rank_partition[k];
    if (!pi.any()) continue;
    SchmidtClass cls;
    cls.rank = k;
    for (std::size_t n = 0; n < k; ++n) {
      cls.values.push_back(gather_value(terms, pi, n));
      cls.left.push_back(gather_vector(bundle, terms, pi, n, true));
      cls.right.push_back(gather_vector(bundle, terms, pi, n, false));
    }
    out.classes.push_back(std::move(cls));
  }
  return out;
}

SpectralDecomposition positive_selfadjoint_form(const BundleOperator& t, const Config& config) {
  config.validate();
  require_selfadjoint(t, config);
  const Eigen::VectorXd sw = detail::sqrt_weights(t.bundle()->grid);
  for (std::size_t a = 0; a < t.atoms(); ++a) {
    if (t.dim() == 0) break;
    const auto eig = detail::hermitian_eigen(detail::to_euclidean(t.fiber(a), sw));
    const double scale = eig.values.cwiseAbs().maxCoeff();
    const double allowed = std::max(config.equality_tol, config.rank_tol * scale);
    if (eig.values(0) < -allowed) {
      std::ostringstream msg;
      msg << "fiber " << a << " has eigenvalue " << eig.values(0);
      throw Error(ErrorCode::NotPositive, msg.str());
    }
  }
  // T = |T|: the Schmidt values are the eigenvalues and the left family
  // alone spans the spectral projections.
  const CyclicDecomposition schmidt = cyclic_schmidt(t, config);
  SpectralDecomposition out{schmidt.bundle, schmidt.rank_partition, {}};
  for (const auto& cls : schmidt.classes) out.classes.push_back({cls.rank, cls.values, cls.left});
  return out;
}

SignedSequencePair split_parts(const BundleOperator& t, const Config& config) {
  config.validate();
  if (!t.all_finite()) throw Error(ErrorCode::NonFinite, "operator has non-finite entries");
  require_selfadjoint(t, config);
  const Eigen::VectorXd sw = detail::sqrt_weights(t.bundle()->grid);
  SignedSequencePair parts{t.bundle(), std::vector<std::vector<SignedTerm>>(t.atoms()),
                           std::vector<std::vector<SignedTerm>>(t.atoms())};
  detail::for_each_atom(t.atoms(), config.parallelism, [&](std::size_t a) {
    auto split = split_fiber(detail::to_euclidean(t.fiber(a), sw), sw, config.rank_tol);
    parts.pos[a] = std::move(split.pos);
    parts.neg[a] = std::move(split.neg);
  });
  return parts;
}

SpectralDecomposition selfadjoint_merge(const SignedSequencePair& parts, MergeTrace* trace) {
  parts.validate();
  const BundlePtr& bundle = parts.bundle;
  const std::size_t atoms = bundle->atoms();
  const auto dim = static_cast<Eigen::Index>(bundle->dim());

  std::size_t pos_len = 0;
  std::size_t neg_len = 0;
  for (std::size_t a = 0; a < atoms; ++a) {
    pos_len = std::max(pos_len, parts.pos[a].size());
    neg_len = std::max(neg_len, parts.neg[a].size());
  }

  // The n-th term of a list as a step function / module element, zero on
  // atoms whose list is shorter.
  auto padded_value = [&](const std::vector<std::vector<SignedTerm>>& lists, std::size_t n) {
    std::vector<Complex> v(atoms, 0.0);
    for (std::size_t a = 0; a < atoms; ++a) {
      if (n < lists[a].size()) v[a] = lists[a][n].value;
    }
    return StepFunction(std::move(v));
  };
  auto padded_vector = [&](const std::vector<std::vector<SignedTerm>>& lists, std::size_t n) {
    std::vector<ComplexVector> f(atoms, ComplexVector::Zero(dim));
    for (std::size_t a = 0; a < atoms; ++a) {
      if (n < lists[a].size()) f[a] = lists[a][n].vector;
    }
    return ModuleElement(bundle, std::move(f));
  };

  std::vector<StepFunction> values;
  std::vector<ModuleElement> vectors;
  for (std::size_t n = 0; n < pos_len; ++n) {
    values.push_back(padded_value(parts.pos, n));
    vectors.push_back(padded_vector(parts.pos, n));
  }

  for (std::size_t j = 0; j < neg_len; ++j) {
    const StepFunction f_neg = padded_value(parts.neg, j);
    const ModuleElement xi_neg = padded_vector(parts.neg, j);
    const StepFunction minus_f_neg = -f_neg;

    // One more slot, zero everywhere, so the inserted term always has room.
    values.push_back(StepFunction::zero(atoms));
    vectors.push_back(ModuleElement::zero(bundle));
    const std::size_t len = values.size();

    std::vector<Idempotent> z(len);
    for (std::size_t n = 0; n < len; ++n) z[n] = Idempotent::support((f_neg - values[n].abs()).positive_part());

    std::vector<StepFunction> next_values;
    std::vector<ModuleElement> next_vectors;
    next_values.reserve(len);
    next_vectors.reserve(len);
    {
      const PartitionOfUnity split({z[0], z[0].complement()});
      const StepFunction f[] = {minus_f_neg, values[0]};
      const ModuleElement xi[] = {xi_neg, vectors[0]};
      next_values.push_back(mix(split, f));
      next_vectors.push_back(mix(split, xi));
    }
    for (std::size_t n = 1; n < len; ++n) {
      const PartitionOfUnity split({z[n - 1], z[n].minus(z[n - 1]), z[n].complement()});
      const StepFunction f[] = {values[n - 1], minus_f_neg, values[n]};
      const ModuleElement xi[] = {vectors[n - 1], xi_neg, vectors[n]};
      next_values.push_back(mix(split, f));
      next_vectors.push_back(mix(split, xi));
    }
    values = std::move(next_values);
    vectors = std::move(next_vectors);
    if (trace) trace->steps.push_back({std::move(z), values});
  }

  // Nonzero terms form a prefix on every atom; its length is the rank.
  std::vector<std::size_t> ranks(atoms, 0);
  for (std::size_t a = 0; a < atoms; ++a) {
    while (ranks[a] < values.size() && values[ranks[a]][a] != Complex(0.0, 0.0)) ++ranks[a];
  }
  const std::size_t max_rank = ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end());
  if (max_rank > bundle->dim()) {
    throw Error(ErrorCode::MalformedParts, "more terms than the fiber dimension allows");
  }

  SpectralDecomposition out{bundle, partition_by_rank(ranks, bundle->dim()), {}};
  for (std::size_t k = 1; k <= bundle->dim(); ++k) {
    const Idempotent& pi = out.rank_partition[k];
    if (!pi.any()) continue;
    SpectralClass cls;
    cls.rank = k;
    for (std::size_t n = 0; n < k; ++n) {
      cls.eigenvalues.push_back(Idempotent(pi).as_step_function() * values[n]);
      cls.vectors.push_back(vectors[n].restricted(pi));
    }
    out.classes.push_back(std::move(cls));
  }
  return out;
}

SpectralDecomposition eigendecompose(const BundleOperator& t, const Config& config) {
  return selfadjoint_merge(split_parts(t, config));
}

MergeIdentityReport verify_merge_identity(const SignedSequencePair& parts, const SpectralDecomposition& merged,
                                          std::size_t random_samples, std::uint64_t seed) {
  const BundlePtr& bundle = parts.bundle;
  const BundleOperator original = parts.assemble();
  const BundleOperator rebuilt = merged.reconstruct();
  auto deviation = [&](const ModuleElement& v) { return module_norm(apply(original, v) - apply(rebuilt, v)); };

  MergeIdentityReport report;
  const auto dim = static_cast<Eigen::Index>(bundle->dim());
  auto test_side = [&](const std::vector<std::vector<SignedTerm>>& lists) {
    std::size_t len = 0;
    for (const auto& l : lists) len = std::max(len, l.size());
    for (std::size_t n = 0; n < len; ++n) {
      std::vector<ComplexVector> f(bundle->atoms(), ComplexVector::Zero(dim));
      for (std::size_t a = 0; a < lists.size(); ++a) {
        if (n < lists[a].size()) f[a] = lists[a][n].vector;
      }
      report.test_vector_deviation = std::max(report.test_vector_deviation, deviation(ModuleElement(bundle, f)));
      ++report.test_vectors;
    }
  };
  test_side(parts.pos);
  test_side(parts.neg);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (std::size_t s = 0; s < random_samples; ++s) {
    std::vector<ComplexVector> f(bundle->atoms(), ComplexVector::Zero(dim));
    for (auto& fiber : f) {
      for (Eigen::Index i = 0; i < dim; ++i) fiber(i) = Complex(gauss(rng), gauss(rng));
    }
    ModuleElement v(bundle, std::move(f));
    StepFunction inv = vector_norm(v);
    std::vector<Complex> scale(inv.size());
    for (std::size_t a = 0; a < scale.size(); ++a) scale[a] = inv[a] == Complex(0.0) ? 0.0 : 1.0 / inv[a];
    v = StepFunction(scale) * v;
    report.random_deviation = std::max(report.random_deviation, deviation(v));
  }
  return report;
}

ModuleElement null_directions(const BundleOperator& t, const Idempotent& mask, const Config& config) {
  const BundlePtr& bundle = t.bundle();
  const Eigen::VectorXd sw = detail::sqrt_weights(bundle->grid);
  const Eigen::VectorXcd inv_sw = sw.cwiseInverse().cast<Complex>();
  std::vector<ComplexVector> fibers(t.atoms(), ComplexVector::Zero(static_cast<Eigen::Index>(t.dim())));
  detail::for_each_atom(t.atoms(), config.parallelism, [&](std::size_t a) {
    if (!mask[a] || t.dim() == 0) return;
    const auto eig = detail::hermitian_eigen(detail::to_euclidean(t.fiber(a), sw));
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < eig.values.size(); ++i) {
      if (std::abs(eig.values(i)) < std::abs(eig.values(best))) best = i;
    }
    ComplexVector v = inv_sw.asDiagonal() * eig.vectors.col(best);
    detail::fix_phase(v);
    fibers[a] = std::move(v);
  });
  return ModuleElement(bundle, std::move(fibers));
}

}  // namespace kaplansky
