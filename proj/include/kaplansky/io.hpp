#pragma once

// JSON documents tagged "schema": "kaplansky/v1". Complex numbers are
// [re, im] pairs; matrices are lists of rows.

#include <string_view>

#include <nlohmann/json.hpp>

#include "kaplansky/bundle.hpp"
#include "kaplansky/pie.hpp"
#include "kaplansky/spectral.hpp"
#include "kaplansky/vna.hpp"

namespace kaplansky::io {

using nlohmann::json;

inline constexpr std::string_view kSchema = "kaplansky/v1";

/// Parses text, throwing Error(Parse) on malformed JSON.
json parse(std::string_view text);
/// Throws Error(Schema) unless the document carries the expected tag.
void require_schema(const json& doc);

json to_json(const MeasureSpace& space);
json to_json(const SGrid& grid);
json to_json(const StepFunction& f);
json to_json(const Idempotent& pi);
json to_json(const ModuleElement& xi);
json to_json(const BundleOperator& t);
json to_json(const KernelBundle& kernel);
json to_json(const MatrixField& x);
json to_json(const SpectralDecomposition& d);
json to_json(const CentralDiagonalForm& form);

MeasureSpace measure_space_from_json(const json& j);
SGrid grid_from_json(const json& j);
StepFunction step_function_from_json(const json& j);
Idempotent idempotent_from_json(const json& j);
ModuleElement element_from_json(const json& j, const BundlePtr& bundle);
BundleOperator operator_from_json(const json& j, const BundlePtr& bundle);
/// Self-adjoint kernels may list only the upper triangle (row i holding
/// columns i..m-1); the loader mirrors it with conjugation.
KernelBundle kernel_from_json(const json& j);
MatrixField matrix_field_from_json(const json& j);
/// Reloads an exported decomposition, including its space and grid.
SpectralDecomposition spectral_decomposition_from_json(const json& j);
CentralDiagonalForm diagonal_form_from_json(const json& j);

}  // namespace kaplansky::io
