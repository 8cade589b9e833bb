#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kaplansky/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace kaplansky;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d(KP_SCRATCH_DIR);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string("\"") + KP_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          (scratch() / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string kernel_text(std::uint64_t seed, bool asymmetric = false) {
  testing::Rng rng(seed);
  const auto b = testing::random_bundle(rng, 3, 4);
  auto samples = testing::random_kernel(rng, b).samples();
  if (asymmetric) samples[1](0, 3) += 0.25;
  return io::to_json(KernelBundle(b, samples, true)).dump();
}

}  // namespace

TEST_CASE("validate exit codes") {
  CHECK(cli("validate " + q(write("k.json", kernel_text(1)))).code == 0);
  const auto bad = cli("validate " + q(write("asym.json", kernel_text(1, true))));
  CHECK(bad.code == 1);
  const auto report = nlohmann::json::parse(bad.out);
  CHECK(report["selfadjoint"]["location"]["atom_index"] == 1);
  CHECK(cli("validate " + q(write("broken.json", "{oops"))).code == 2);
  CHECK(cli("validate " + q(scratch() / "missing.json")).code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("decompose is deterministic and round trips") {
  const auto k = write("k.json", kernel_text(2));
  const auto a = cli("decompose " + q(k) + " --out " + q(scratch() / "d1.json"));
  const auto b = cli("decompose " + q(k) + " --out " + q(scratch() / "d2.json") + " --parallelism 1");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const std::string d1 = slurp(scratch() / "d1.json");
  // The two reports differ only in the embedded config block.
  const auto j1 = nlohmann::json::parse(d1);
  auto j2 = nlohmann::json::parse(slurp(scratch() / "d2.json"));
  j2["config"] = j1["config"];
  CHECK(j1 == j2);

  const auto c = cli("decompose " + q(k) + " --out " + q(scratch() / "d3.json"));
  CHECK(slurp(scratch() / "d3.json") == d1);

  const auto kernel = io::kernel_from_json(io::parse(slurp(k)));
  const auto reloaded = io::spectral_decomposition_from_json(j1);
  const double residual = operator_norm(build_operator(kernel) - reloaded.reconstruct());
  CHECK(std::abs(residual - j1["residual"].get<double>()) <= 1e-12 * j1["operator_norm"].get<double>());
}

TEST_CASE("decompose rejects non self-adjoint input") {
  CHECK(cli("decompose " + q(write("asym.json", kernel_text(3, true)))).code == 1);
}

TEST_CASE("decompose and diagonalize a matrix field") {
  const char* field = R"({"schema": "kaplansky/v1", "space": {"atoms": ["a", "b"], "weights": [1, 1]}, "dim": 2,
    "fields": [[[[3, 0], [0, 0]], [[0, 0], [-2, 0]]], [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]})";
  const auto f = write("field.json", field);
  const auto a = cli("decompose " + q(f));
  REQUIRE(a.code == 0);
  const auto doc = nlohmann::json::parse(a.out);
  CHECK(doc["kind"] == "diagonal_form");
  CHECK(doc["central_partition"][2] == nlohmann::json::array({1, 0}));
  CHECK(doc.contains("unitary"));
  CHECK(cli("diagonalize " + q(f)).out == a.out);
  const auto text = cli("diagonalize " + q(f) + " --format text");
  CHECK(text.code == 0);
  CHECK(text.out.find("diagonal form") != std::string::npos);
}

TEST_CASE("solve exit codes") {
  const char* kernel = R"({"schema": "kaplansky/v1", "space": {"atoms": ["a", "b"], "weights": [1, 1]},
    "grid": {"points": ["s0", "s1"], "quad_weights": [1, 1]}, "selfadjoint": true,
    "samples": [[[[2, 0], [0, 0]], [[1, 0]]], [[[5, 0], [0, 0]], [[2, 0]]]]})";
  const auto k = write("solve_k.json", kernel);
  auto lambda = [](const std::string& name, double a, double b) {
    std::ostringstream s;
    s.precision(17);
    s << R"({"schema": "kaplansky/v1", "values": [[)" << a << ", 0], [" << b << ", 0]]}";
    return write(name, s.str());
  };
  const auto full = cli("solve " + q(k) + " " + q(lambda("l1.json", 2, 5)));
  CHECK(full.code == 0);
  CHECK(nlohmann::json::parse(full.out)["pi"] == nlohmann::json::array({1, 1}));
  const auto part = cli("solve " + q(k) + " " + q(lambda("l2.json", 2, 3)));
  CHECK(part.code == 0);
  CHECK(nlohmann::json::parse(part.out)["pi"] == nlohmann::json::array({1, 0}));
  CHECK(cli("solve " + q(k) + " " + q(lambda("l3.json", 2 + 1e-6, 5 + 1e-6))).code == 3);

  // A solve tolerance far above the kernel's scale breaks the residual bound.
  const char* tiny = R"({"schema": "kaplansky/v1", "space": {"atoms": ["a", "b"], "weights": [1, 1]},
    "grid": {"points": ["s0", "s1"], "quad_weights": [1, 1]}, "selfadjoint": true,
    "samples": [[[[0.001, 0], [0, 0]], [[0, 0]]], [[[0.001, 0], [0, 0]], [[0, 0]]]]})";
  const auto t = write("tiny.json", tiny);
  CHECK(cli("solve " + q(t) + " " + q(lambda("l4.json", 0.05, 0.05)) + " --solve-tol 0.1").code == 4);
}
