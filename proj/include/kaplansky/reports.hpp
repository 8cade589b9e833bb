#pragma once

// Machine-readable reports emitted by the command line front end. Every
// report embeds the run configuration that produced it.

#include <string>

#include "kaplansky/io.hpp"

namespace kaplansky::report {

using nlohmann::json;

struct RunConfig {
  Config numerics;
  std::string output_format = "json";
};

json config_json(const RunConfig& config);

/// Schema, self-adjointness and Hilbert-Schmidt admissibility of a kernel.
/// "valid" is true iff all checks pass.
json validate_kernel(const KernelBundle& kernel, const RunConfig& config);

/// Spectral decomposition of a self-adjoint kernel's operator together with
/// its reconstruction residual.
json decompose_kernel(const KernelBundle& kernel, const RunConfig& config);

/// Central diagonal form, unitary/diagonal factors and residuals.
json diagonalize_field(const MatrixField& x, const RunConfig& config);

/// Solvability of T f = lambda f. Throws Error(Inconsistent) when a witness
/// fails its residual bound.
json solve(const KernelBundle& kernel, const StepFunction& lambda, const RunConfig& config);

/// Module operator norm of T minus the operator rebuilt from an exported
/// decomposition document.
double decomposition_residual(const json& decomposition, const KernelBundle& kernel);

/// Max fiber norm of x minus the field rebuilt from an exported diagonal
/// form document.
double diagonal_form_residual(const json& form, const MatrixField& x);

}  // namespace kaplansky::report
