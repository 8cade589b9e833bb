#include "kaplansky/pie.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kaplansky {

KernelBundle::KernelBundle(BundlePtr bundle, std::vector<ComplexMatrix> samples, bool selfadjoint)
    : bundle_(std::move(bundle)), samples_(std::move(samples)), selfadjoint_(selfadjoint) {
  if (!bundle_) throw Error(ErrorCode::InvalidArgument, "kernel needs a bundle");
  if (samples_.size() != bundle_->atoms()) {
    throw Error(ErrorCode::DimensionMismatch, "kernel needs one sample matrix per atom");
  }
  const auto m = static_cast<Eigen::Index>(bundle_->dim());
  for (const auto& k : samples_) {
    if (k.rows() != m || k.cols() != m) {
      throw Error(ErrorCode::DimensionMismatch, "kernel samples must be grid-size square");
    }
  }
}

bool KernelBundle::all_finite() const {
  return std::all_of(samples_.begin(), samples_.end(), [](const ComplexMatrix& k) { return k.allFinite(); });
}

namespace {

void require_finite(const KernelBundle& kernel) {
  if (!kernel.all_finite()) throw Error(ErrorCode::NonFinite, "kernel has non-finite samples");
}

double largest_sample(const KernelBundle& kernel) {
  double m = 0.0;
  for (const auto& k : kernel.samples()) m = std::max(m, k.cwiseAbs().maxCoeff());
  return m;
}

void require_selfadjoint_kernel(const KernelBundle& kernel, const Config& config) {
  if (!kernel.flagged_selfadjoint()) {
    throw Error(ErrorCode::NotSelfAdjoint, "kernel is not flagged self-adjoint");
  }
  if (!kernel_is_selfadjoint(kernel, config)) {
    const auto asym = kernel_asymmetry(kernel);
    std::ostringstream msg;
    msg << "kernel asymmetry " << asym.max_defect << " at atom " << asym.atom << " (" << asym.row << ", "
        << asym.col << ")";
    throw Error(ErrorCode::NotSelfAdjoint, msg.str());
  }
}

}  // namespace

HsReport hs_check(const KernelBundle& kernel) {
  require_finite(kernel);
  const auto& w = kernel.bundle()->grid.quad_weights();
  std::vector<Complex> per_atom(kernel.samples().size());
  for (std::size_t a = 0; a < per_atom.size(); ++a) {
    const auto& k = kernel.sample(a);
    double sum = 0.0;
    for (Eigen::Index t = 0; t < k.rows(); ++t) {
      for (Eigen::Index s = 0; s < k.cols(); ++s) {
        sum += w[static_cast<std::size_t>(t)] * w[static_cast<std::size_t>(s)] * std::norm(k(t, s));
      }
    }
    per_atom[a] = sum;
  }
  StepFunction f(std::move(per_atom));
  const double sup = f.sup_norm();
  return {std::move(f), sup};
}

AsymmetryReport kernel_asymmetry(const KernelBundle& kernel) {
  AsymmetryReport report;
  for (std::size_t a = 0; a < kernel.samples().size(); ++a) {
    const auto& k = kernel.sample(a);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      for (Eigen::Index j = i; j < k.cols(); ++j) {
        const double d = std::abs(k(i, j) - std::conj(k(j, i)));
        if (d > report.max_defect || std::isnan(d)) {
          report = {d, a, static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
        }
      }
    }
  }
  return report;
}

bool kernel_is_selfadjoint(const KernelBundle& kernel, const Config& config) {
  const double defect = kernel_asymmetry(kernel).max_defect;
  return defect <= config.equality_tol * std::max(1.0, largest_sample(kernel));
}

BundleOperator build_operator(const KernelBundle& kernel) {
  const auto& w = kernel.bundle()->grid.quad_weights();
  const Eigen::VectorXcd weights =
      Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())).cast<Complex>();
  std::vector<ComplexMatrix> maps(kernel.samples().size());
  for (std::size_t a = 0; a < maps.size(); ++a) maps[a] = kernel.sample(a) * weights.asDiagonal();
  return BundleOperator(kernel.bundle(), std::move(maps));
}

SpectralDecomposition kernel_spectrum(const KernelBundle& kernel, const Config& config) {
  require_finite(kernel);
  require_selfadjoint_kernel(kernel, config);
  return eigendecompose(build_operator(kernel), config);
}

std::optional<SolvabilityWitness> check_solvable(const KernelBundle& kernel, const StepFunction& lambda,
                                                 const Config& config) {
  config.validate();
  const std::size_t atoms = kernel.samples().size();
  if (lambda.size() != atoms) throw Error(ErrorCode::DimensionMismatch, "lambda lives over a different space");
  if (!lambda.is_real(config.equality_tol)) throw Error(ErrorCode::NotReal, "lambda has a nonzero imaginary part");

  const SpectralDecomposition spectrum = kernel_spectrum(kernel, config);
  const std::size_t m = kernel.bundle()->dim();

  auto matches = [&](const Idempotent& domain, const StepFunction& branch) {
    std::vector<bool> mask(atoms, false);
    for (std::size_t a = 0; a < atoms; ++a) {
      mask[a] = domain[a] && std::abs(lambda[a].real() - branch[a].real()) <= config.solve_tol;
    }
    return Idempotent(std::move(mask));
  };

  std::optional<Idempotent> best_mask;
  Branch best_branch;
  const StepFunction* best_values = nullptr;
  auto consider = [&](const Idempotent& mask, Branch branch, const StepFunction* values) {
    // Candidates arrive in ascending (k, n) order, so strict > keeps the
    // smallest index among equally large masks.
    if (mask.any() && (!best_mask || mask.count() > best_mask->count())) {
      best_mask = mask;
      best_branch = branch;
      best_values = values;
    }
  };

  const StepFunction zero = StepFunction::zero(atoms);
  const Idempotent deficient = spectrum.rank_partition[m].complement();
  consider(matches(deficient, zero), kZeroBranch, &zero);
  for (const auto& cls : spectrum.classes) {
    for (std::size_t n = 0; n < cls.rank; ++n) {
      consider(matches(spectrum.rank_partition[cls.rank], cls.eigenvalues[n]), Branch{cls.rank, n + 1},
               &cls.eigenvalues[n]);
    }
  }
  if (!best_mask) return std::nullopt;

  double max_gap = 0.0;
  for (std::size_t a = 0; a < atoms; ++a) {
    if ((*best_mask)[a]) max_gap = std::max(max_gap, std::abs(lambda[a].real() - (*best_values)[a].real()));
  }

  ModuleElement eigenfunction =
      best_branch == kZeroBranch
          ? null_directions(build_operator(kernel), *best_mask, config)
          : spectrum.find_class(best_branch.k)->vectors[best_branch.n - 1].restricted(*best_mask);
  return SolvabilityWitness{*best_mask, best_branch, std::move(eigenfunction), max_gap};
}

PieSolution solve_pie(const KernelBundle& kernel, const StepFunction& lambda, const Config& config) {
  auto witness = check_solvable(kernel, lambda, config);
  if (!witness) throw Error(ErrorCode::NotSolvable, "lambda meets no eigenvalue branch on any atom");

  const BundleOperator t = build_operator(kernel);
  ModuleElement f = witness->eigenfunction;
  std::vector<Complex> real_lambda(lambda.size());
  for (std::size_t a = 0; a < real_lambda.size(); ++a) real_lambda[a] = lambda[a].real();
  const double residual = module_norm(apply(t, f) - StepFunction(real_lambda) * f);
  const double bound = 10.0 * config.solve_tol * operator_norm(t, config);

  const StepFunction norms = vector_norm(f);
  for (std::size_t a = 0; a < norms.size(); ++a) {
    if (witness->pi[a] && !(norms[a].real() > 0.0)) {
      throw Error(ErrorCode::Inconsistent, "witness eigenfunction vanishes on its idempotent");
    }
  }
  if (!(residual <= bound)) {
    std::ostringstream msg;
    msg << "residual " << residual << " exceeds the bound " << bound;
    throw Error(ErrorCode::Inconsistent, msg.str());
  }
  return PieSolution{std::move(f), std::move(*witness), residual, bound};
}

}  // namespace kaplansky
