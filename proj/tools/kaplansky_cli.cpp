// Command line front end. Talks to the library only through the C API.
//
// Exit codes: 0 ok, 1 domain failure, 2 parse/schema failure, 3 not
// solvable, 4 internal inconsistency.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kaplansky/kaplansky.h"

namespace {

enum Exit : int { kOk = 0, kDomain = 1, kParse = 2, kNotSolvable = 3, kInconsistent = 4 };

struct Options {
  double rank_tol = 1e-10;
  double solve_tol = 1e-8;
  double equality_tol = 1e-12;
  std::size_t parallelism = 0;
  std::string format = "json";
  std::string out;
};

struct StringDeleter {
  void operator()(char* s) const { kp_string_free(s); }
};
using Report = std::unique_ptr<char, StringDeleter>;

struct KernelDeleter {
  void operator()(kp_kernel* k) const { kp_kernel_free(k); }
};
struct FieldDeleter {
  void operator()(kp_field* f) const { kp_field_free(f); }
};
struct StepFnDeleter {
  void operator()(kp_stepfn* f) const { kp_stepfn_free(f); }
};

kp_config to_config(const Options& o) {
  kp_config c = kp_config_default();
  c.rank_tol = o.rank_tol;
  c.solve_tol = o.solve_tol;
  c.equality_tol = o.equality_tol;
  c.parallelism = o.parallelism;
  c.text_output = o.format == "text" ? 1 : 0;
  return c;
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

int fail(const std::string& context, kp_status status, int code) {
  std::cerr << "error: " << context << ": " << kp_status_string(status);
  const std::string detail = kp_last_error();
  if (!detail.empty()) std::cerr << " (" << detail << ")";
  std::cerr << "\n";
  return code;
}

int exit_for(kp_status status) {
  switch (status) {
    case KP_OK: return kOk;
    case KP_ERR_PARSE:
    case KP_ERR_SCHEMA: return kParse;
    case KP_ERR_NOT_SOLVABLE: return kNotSolvable;
    case KP_ERR_INCONSISTENT:
    case KP_ERR_INTERNAL: return kInconsistent;
    default: return kDomain;
  }
}

// Loading failures are all input problems, so they map to the parse code.
int load_failure(const std::string& path, kp_status status) { return fail("cannot load " + path, status, kParse); }

bool load_text(const std::string& path, std::string& text) {
  if (read_file(path, text)) return true;
  std::cerr << "error: cannot read " << path << "\n";
  return false;
}

// Writes the JSON report to --out (or stdout in json mode) and the summary
// to stdout in text mode (stderr otherwise).
int emit(const Options& o, const char* report, const std::string& summary, int code) {
  if (!o.out.empty()) {
    std::ofstream file(o.out, std::ios::binary);
    if (!file || !(file << report)) {
      std::cerr << "error: cannot write " << o.out << "\n";
      return kDomain;
    }
  } else if (o.format == "json") {
    std::cout << report;
  }
  (o.format == "text" ? std::cout : std::cerr) << summary;
  return code;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string class_counts(const nlohmann::json& doc, const char* partition_key) {
  std::ostringstream s;
  const auto& parts = doc.at(partition_key);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    std::size_t count = 0;
    for (const auto& b : parts[k]) count += b.get<int>() == 1 ? 1 : 0;
    if (count > 0) s << "  class k=" << k << ": " << count << " atom(s)\n";
  }
  return s.str();
}

int cmd_validate(const Options& o, const std::string& kernel_path) {
  std::string text;
  if (!load_text(kernel_path, text)) return kParse;
  kp_kernel* raw = nullptr;
  if (auto st = kp_kernel_parse(text.c_str(), &raw); st != KP_OK) return load_failure(kernel_path, st);
  std::unique_ptr<kp_kernel, KernelDeleter> kernel(raw);

  const kp_config config = to_config(o);
  char* out = nullptr;
  int valid = 0;
  if (auto st = kp_kernel_validate(kernel.get(), &config, &out, &valid); st != KP_OK) {
    return fail("validate", st, exit_for(st));
  }
  Report report(out);
  const auto doc = nlohmann::json::parse(report.get());
  std::ostringstream s;
  s << (valid ? "valid" : "INVALID") << " kernel: " << kp_kernel_atom_count(kernel.get()) << " atoms, grid "
    << kp_kernel_grid_size(kernel.get()) << "\n";
  if (doc["hs"].contains("sup")) s << "  Hilbert-Schmidt sup: " << fmt(doc["hs"]["sup"].get<double>()) << "\n";
  const auto& sa = doc["selfadjoint"];
  if (sa.contains("max_asymmetry")) {
    const auto& at = sa["location"];
    s << "  max asymmetry " << fmt(sa["max_asymmetry"].get<double>()) << " at atom "
      << at["atom"].get<std::string>() << " (" << at["row"] << ", " << at["col"] << ")\n";
  }
  if (!doc["finite"].get<bool>()) s << "  kernel has non-finite samples\n";
  return emit(o, report.get(), s.str(), valid ? kOk : kDomain);
}

int decompose_kernel(const Options& o, const std::string& path, const std::string& text) {
  kp_kernel* raw = nullptr;
  if (auto st = kp_kernel_parse(text.c_str(), &raw); st != KP_OK) return load_failure(path, st);
  std::unique_ptr<kp_kernel, KernelDeleter> kernel(raw);
  const kp_config config = to_config(o);
  char* out = nullptr;
  if (auto st = kp_kernel_decompose(kernel.get(), &config, &out); st != KP_OK) {
    return fail("decompose", st, exit_for(st));
  }
  Report report(out);
  const auto doc = nlohmann::json::parse(report.get());
  std::ostringstream s;
  s << "spectral decomposition: residual " << fmt(doc["residual"].get<double>()) << " (operator norm "
    << fmt(doc["operator_norm"].get<double>()) << ")\n"
    << class_counts(doc, "rank_partition");
  return emit(o, report.get(), s.str(), kOk);
}

int diagonalize_path(const Options& o, const std::string& path, const std::string& text) {
  kp_field* raw = nullptr;
  if (auto st = kp_field_parse(text.c_str(), &raw); st != KP_OK) return load_failure(path, st);
  std::unique_ptr<kp_field, FieldDeleter> field(raw);
  const kp_config config = to_config(o);
  char* out = nullptr;
  if (auto st = kp_field_diagonalize(field.get(), &config, &out); st != KP_OK) {
    return fail("diagonalize", st, exit_for(st));
  }
  Report report(out);
  const auto doc = nlohmann::json::parse(report.get());
  std::ostringstream s;
  s << "diagonal form: |U*xU - D| " << fmt(doc["residual"].get<double>()) << ", reconstruction residual "
    << fmt(doc["reconstruction_residual"].get<double>()) << "\n"
    << class_counts(doc, "central_partition");
  return emit(o, report.get(), s.str(), kOk);
}

int cmd_decompose(const Options& o, const std::string& path) {
  std::string text;
  if (!load_text(path, text)) return kParse;
  kp_document_kind kind = KP_DOC_UNKNOWN;
  if (auto st = kp_document_kind_of(text.c_str(), &kind); st != KP_OK) return load_failure(path, st);
  if (kind == KP_DOC_KERNEL) return decompose_kernel(o, path, text);
  if (kind == KP_DOC_MATRIX_FIELD) return diagonalize_path(o, path, text);
  std::cerr << "error: " << path << " is neither a kernel nor a matrix field\n";
  return kParse;
}

int cmd_diagonalize(const Options& o, const std::string& path) {
  std::string text;
  if (!load_text(path, text)) return kParse;
  return diagonalize_path(o, path, text);
}

int cmd_solve(const Options& o, const std::string& kernel_path, const std::string& lambda_path) {
  std::string kernel_text;
  std::string lambda_text;
  if (!load_text(kernel_path, kernel_text) || !load_text(lambda_path, lambda_text)) return kParse;
  kp_kernel* kraw = nullptr;
  if (auto st = kp_kernel_parse(kernel_text.c_str(), &kraw); st != KP_OK) return load_failure(kernel_path, st);
  std::unique_ptr<kp_kernel, KernelDeleter> kernel(kraw);
  kp_stepfn* lraw = nullptr;
  if (auto st = kp_stepfn_parse(lambda_text.c_str(), &lraw); st != KP_OK) return load_failure(lambda_path, st);
  std::unique_ptr<kp_stepfn, StepFnDeleter> lambda(lraw);

  const kp_config config = to_config(o);
  char* out = nullptr;
  int solvable = 0;
  if (auto st = kp_kernel_solve(kernel.get(), lambda.get(), &config, &out, &solvable); st != KP_OK) {
    return fail("solve", st, exit_for(st));
  }
  Report report(out);
  const auto doc = nlohmann::json::parse(report.get());
  std::ostringstream s;
  if (solvable) {
    std::size_t count = 0;
    for (const auto& b : doc["pi"]) count += b.get<int>() == 1 ? 1 : 0;
    s << "solvable: branch (" << doc["branch"][0] << ", " << doc["branch"][1] << ") on " << count
      << " atom(s), max gap " << fmt(doc["max_gap"].get<double>()) << ", residual "
      << fmt(doc["residual"].get<double>()) << "\n";
  } else {
    s << "not solvable: lambda meets no eigenvalue branch\n";
  }
  return emit(o, report.get(), s.str(), solvable ? kOk : kNotSolvable);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral decompositions of operator bundles and partial integral equations"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&o](CLI::App* cmd) {
    cmd->add_option("--rank-tol", o.rank_tol, "Relative cutoff below which fiber values count as zero")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--solve-tol", o.solve_tol, "Absolute tolerance for matching lambda to a branch")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--equality-tol", o.equality_tol, "Absolute equality tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--parallelism", o.parallelism, "Concurrent fibers (0 = auto)");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    cmd->add_option("--out", o.out, "Write the JSON report here");
  };

  std::string first;
  std::string second;
  auto* validate = app.add_subcommand("validate", "Check a kernel file for admissibility");
  validate->add_option("kernel", first, "Kernel file")->required();
  auto* decompose = app.add_subcommand("decompose", "Decompose a kernel or matrix-field file");
  decompose->add_option("input", first, "Kernel or matrix-field file")->required();
  auto* solve = app.add_subcommand("solve", "Decide solvability of T f = lambda f");
  solve->add_option("kernel", first, "Kernel file")->required();
  solve->add_option("lambda", second, "Step-function file for lambda")->required();
  auto* diag = app.add_subcommand("diagonalize", "Diagonalize a self-adjoint matrix field");
  diag->add_option("field", first, "Matrix-field file")->required();
  for (auto* cmd : {validate, decompose, solve, diag}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  if (*validate) return cmd_validate(o, first);
  if (*decompose) return cmd_decompose(o, first);
  if (*solve) return cmd_solve(o, first, second);
  return cmd_diagonalize(o, first);
}
