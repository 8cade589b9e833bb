#include "kaplansky/reports.hpp"

#include <cmath>

namespace kaplansky::report {

json config_json(const RunConfig& config) {
  return {{"rank_tol", config.numerics.rank_tol},
          {"solve_tol", config.numerics.solve_tol},
          {"equality_tol", config.numerics.equality_tol},
          {"parallelism", config.numerics.parallelism},
          {"output_format", config.output_format}};
}

json validate_kernel(const KernelBundle& kernel, const RunConfig& config) {
  const bool finite = kernel.all_finite();
  json doc = {{"schema", io::kSchema}, {"kind", "validation"}, {"config", config_json(config)}};
  doc["finite"] = finite;

  json sa = {{"flagged", kernel.flagged_selfadjoint()}};
  // Checked whether or not the file sets the flag: the spectral theory
  // requires a self-adjoint kernel either way.
  const auto asym = kernel_asymmetry(kernel);
  const bool sa_ok = finite && kernel_is_selfadjoint(kernel, config.numerics);
  sa["max_asymmetry"] = asym.max_defect;
  sa["location"] = {{"atom", kernel.bundle()->space.atoms()[asym.atom]},
                    {"atom_index", asym.atom},
                    {"row", asym.row},
                    {"col", asym.col}};
  sa["ok"] = sa_ok;
  doc["selfadjoint"] = std::move(sa);

  bool hs_ok = finite;
  if (finite) {
    const auto hs = hs_check(kernel);
    json per_atom = json::array();
    for (const auto& v : hs.per_atom.values()) per_atom.push_back(v.real());
    hs_ok = std::isfinite(hs.sup);
    doc["hs"] = {{"per_atom", std::move(per_atom)}, {"sup", hs.sup}, {"ok", hs_ok}};
  } else {
    doc["hs"] = {{"ok", false}};
  }
  doc["valid"] = finite && sa_ok && hs_ok;
  return doc;
}

json decompose_kernel(const KernelBundle& kernel, const RunConfig& config) {
  const SpectralDecomposition d = kernel_spectrum(kernel, config.numerics);
  const BundleOperator t = build_operator(kernel);
  const double norm = operator_norm(t, config.numerics);
  const double residual = operator_norm(t - d.reconstruct(), config.numerics);
  json doc = io::to_json(d);
  doc["kind"] = "spectral_decomposition";
  doc["config"] = config_json(config);
  doc["operator_norm"] = norm;
  doc["residual"] = residual;
  return doc;
}

json diagonalize_field(const MatrixField& x, const RunConfig& config) {
  const CentralDiagonalForm form = diagonalize(x, config.numerics);
  const DiagonalMatrixForm factors = to_diagonal_matrix(form);
  const StepFunction per_atom = diagonal_residual(x, factors);
  json doc = io::to_json(form);
  doc["kind"] = "diagonal_form";
  doc["config"] = config_json(config);
  doc["unitary"] = io::to_json(factors.unitary)["fields"];
  doc["diagonal"] = io::to_json(factors.diagonal)["fields"];
  json residuals = json::array();
  for (const auto& v : per_atom.values()) residuals.push_back(v.real());
  doc["residual"] = per_atom.sup_norm();
  doc["residual_per_atom"] = std::move(residuals);
  doc["reconstruction_residual"] = (x - form.reconstruct()).norm();
  doc["norm"] = x.norm();
  return doc;
}

json solve(const KernelBundle& kernel, const StepFunction& lambda, const RunConfig& config) {
  json doc = {{"schema", io::kSchema}, {"kind", "solvability"}, {"config", config_json(config)}};
  const auto witness = check_solvable(kernel, lambda, config.numerics);
  if (!witness) {
    doc["solvable"] = false;
    doc["pi"] = nullptr;
    doc["branch"] = nullptr;
    doc["max_gap"] = nullptr;
    doc["residual"] = nullptr;
    return doc;
  }
  const PieSolution solution = solve_pie(kernel, lambda, config.numerics);
  doc["solvable"] = true;
  doc["pi"] = io::to_json(solution.witness.pi);
  doc["branch"] = {solution.witness.branch.k, solution.witness.branch.n};
  doc["max_gap"] = solution.witness.max_gap;
  doc["residual"] = solution.residual;
  doc["residual_bound"] = solution.bound;
  doc["eigenfunction"] = io::to_json(solution.f);
  return doc;
}

double decomposition_residual(const json& decomposition, const KernelBundle& kernel) {
  const SpectralDecomposition d = io::spectral_decomposition_from_json(decomposition);
  const BundleOperator t = build_operator(kernel);
  const BundleOperator rebuilt(t.bundle(), d.reconstruct().fiber_maps());
  return operator_norm(t - rebuilt);
}

double diagonal_form_residual(const json& form, const MatrixField& x) {
  const CentralDiagonalForm f = io::diagonal_form_from_json(form);
  return (x - MatrixField(x.bundle(), f.reconstruct().fibers())).norm();
}

}  // namespace kaplansky::report
