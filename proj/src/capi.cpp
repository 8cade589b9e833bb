#include "kaplansky/kaplansky.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "kaplansky/reports.hpp"

struct kp_kernel {
  kaplansky::KernelBundle value;
};

struct kp_field {
  kaplansky::MatrixField value;
};

struct kp_stepfn {
  kaplansky::StepFunction value;
};

namespace {

using kaplansky::Error;
using kaplansky::ErrorCode;

thread_local std::string last_error;

kp_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return KP_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return KP_ERR_DIMENSION;
    case ErrorCode::NonFinite: return KP_ERR_NON_FINITE;
    case ErrorCode::InvalidPartition: return KP_ERR_INVALID_PARTITION;
    case ErrorCode::NotSelfAdjoint: return KP_ERR_NOT_SELFADJOINT;
    case ErrorCode::NotPositive: return KP_ERR_NOT_POSITIVE;
    case ErrorCode::NotProjection: return KP_ERR_NOT_PROJECTION;
    case ErrorCode::NotReal: return KP_ERR_NOT_REAL;
    case ErrorCode::MalformedParts: return KP_ERR_MALFORMED_PARTS;
    case ErrorCode::NotSolvable: return KP_ERR_NOT_SOLVABLE;
    case ErrorCode::Inconsistent: return KP_ERR_INCONSISTENT;
    case ErrorCode::Parse: return KP_ERR_PARSE;
    case ErrorCode::Schema: return KP_ERR_SCHEMA;
  }
  return KP_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes and the thread-local
// error message.
template <class Fn>
kp_status guard(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return KP_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return KP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return KP_ERR_INTERNAL;
  }
}

kp_status null_argument(const char* name) {
  last_error = std::string("null argument: ") + name;
  return KP_ERR_INVALID_ARGUMENT;
}

kaplansky::report::RunConfig run_config(const kp_config* config) {
  const kp_config c = config ? *config : kp_config_default();
  kaplansky::report::RunConfig rc;
  rc.numerics.rank_tol = c.rank_tol;
  rc.numerics.solve_tol = c.solve_tol;
  rc.numerics.equality_tol = c.equality_tol;
  rc.numerics.parallelism = c.parallelism;
  rc.output_format = c.text_output ? "text" : "json";
  rc.numerics.validate();
  return rc;
}

char* export_string(const kaplansky::report::json& doc) {
  const std::string text = doc.dump(2) + "\n";
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* kp_version(void) { return "1.0.0"; }

const char* kp_status_string(kp_status status) {
  switch (status) {
    case KP_OK: return "ok";
    case KP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case KP_ERR_PARSE: return "parse error";
    case KP_ERR_SCHEMA: return "schema error";
    case KP_ERR_DIMENSION: return "dimension mismatch";
    case KP_ERR_NON_FINITE: return "non-finite value";
    case KP_ERR_NOT_SELFADJOINT: return "not self-adjoint";
    case KP_ERR_NOT_POSITIVE: return "not positive";
    case KP_ERR_NOT_PROJECTION: return "not a projection";
    case KP_ERR_NOT_REAL: return "not real-valued";
    case KP_ERR_INVALID_PARTITION: return "invalid partition of unity";
    case KP_ERR_MALFORMED_PARTS: return "malformed signed sequence pair";
    case KP_ERR_NOT_SOLVABLE: return "not solvable";
    case KP_ERR_INCONSISTENT: return "tolerance inconsistency";
    case KP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* kp_last_error(void) { return last_error.c_str(); }

kp_config kp_config_default(void) {
  const kaplansky::Config c;
  return kp_config{c.rank_tol, c.solve_tol, c.equality_tol, c.parallelism, 0};
}

void kp_string_free(char* str) { std::free(str); }

kp_status kp_document_kind_of(const char* json, kp_document_kind* kind) {
  if (!json) return null_argument("json");
  if (!kind) return null_argument("kind");
  return guard([&] {
    const auto doc = kaplansky::io::parse(json);
    kaplansky::io::require_schema(doc);
    if (doc.contains("samples")) {
      *kind = KP_DOC_KERNEL;
    } else if (doc.contains("central_partition")) {
      *kind = KP_DOC_DIAGONAL_FORM;
    } else if (doc.contains("fields")) {
      *kind = KP_DOC_MATRIX_FIELD;
    } else if (doc.contains("rank_partition")) {
      *kind = KP_DOC_SPECTRAL_DECOMPOSITION;
    } else if (doc.contains("values")) {
      *kind = KP_DOC_STEP_FUNCTION;
    } else {
      *kind = KP_DOC_UNKNOWN;
    }
  });
}

kp_status kp_kernel_parse(const char* json, kp_kernel** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] { *out = new kp_kernel{kaplansky::io::kernel_from_json(kaplansky::io::parse(json))}; });
}

void kp_kernel_free(kp_kernel* kernel) { delete kernel; }

size_t kp_kernel_atom_count(const kp_kernel* kernel) { return kernel ? kernel->value.bundle()->atoms() : 0; }

size_t kp_kernel_grid_size(const kp_kernel* kernel) { return kernel ? kernel->value.bundle()->dim() : 0; }

kp_status kp_field_parse(const char* json, kp_field** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] { *out = new kp_field{kaplansky::io::matrix_field_from_json(kaplansky::io::parse(json))}; });
}

void kp_field_free(kp_field* field) { delete field; }

kp_status kp_stepfn_parse(const char* json, kp_stepfn** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] {
    const auto doc = kaplansky::io::parse(json);
    kaplansky::io::require_schema(doc);
    *out = new kp_stepfn{kaplansky::io::step_function_from_json(doc)};
  });
}

void kp_stepfn_free(kp_stepfn* fn) { delete fn; }

kp_status kp_kernel_validate(const kp_kernel* kernel, const kp_config* config, char** report, int* valid) {
  if (!kernel) return null_argument("kernel");
  if (!report) return null_argument("report");
  return guard([&] {
    const auto doc = kaplansky::report::validate_kernel(kernel->value, run_config(config));
    if (valid) *valid = doc["valid"].get<bool>() ? 1 : 0;
    *report = export_string(doc);
  });
}

kp_status kp_kernel_decompose(const kp_kernel* kernel, const kp_config* config, char** report) {
  if (!kernel) return null_argument("kernel");
  if (!report) return null_argument("report");
  return guard([&] { *report = export_string(kaplansky::report::decompose_kernel(kernel->value, run_config(config))); });
}

kp_status kp_kernel_solve(const kp_kernel* kernel, const kp_stepfn* lambda, const kp_config* config, char** report,
                          int* solvable) {
  if (!kernel) return null_argument("kernel");
  if (!lambda) return null_argument("lambda");
  if (!report) return null_argument("report");
  return guard([&] {
    const auto doc = kaplansky::report::solve(kernel->value, lambda->value, run_config(config));
    if (solvable) *solvable = doc["solvable"].get<bool>() ? 1 : 0;
    *report = export_string(doc);
  });
}

kp_status kp_field_diagonalize(const kp_field* field, const kp_config* config, char** report) {
  if (!field) return null_argument("field");
  if (!report) return null_argument("report");
  return guard([&] { *report = export_string(kaplansky::report::diagonalize_field(field->value, run_config(config))); });
}

kp_status kp_decomposition_residual(const char* decomposition_json, const kp_kernel* kernel, double* residual) {
  if (!decomposition_json) return null_argument("decomposition_json");
  if (!kernel) return null_argument("kernel");
  if (!residual) return null_argument("residual");
  return guard([&] {
    *residual = kaplansky::report::decomposition_residual(kaplansky::io::parse(decomposition_json), kernel->value);
  });
}

kp_status kp_diagonal_form_residual(const char* form_json, const kp_field* field, double* residual) {
  if (!form_json) return null_argument("form_json");
  if (!field) return null_argument("field");
  if (!residual) return null_argument("residual");
  return guard([&] {
    *residual = kaplansky::report::diagonal_form_residual(kaplansky::io::parse(form_json), field->value);
  });
}

}  // extern "C"
