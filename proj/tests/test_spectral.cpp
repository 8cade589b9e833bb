#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kaplansky/spectral.hpp"
#include "support.hpp"

using namespace kaplansky;
using kaplansky::testing::Rng;

namespace {

BundlePtr unit_bundle(std::size_t atoms, std::size_t dim) {
  return make_bundle(MeasureSpace::uniform(atoms), SGrid::unit(dim));
}

BundleOperator diagonal_operator(const BundlePtr& b, const std::vector<std::vector<double>>& diag) {
  std::vector<ComplexMatrix> maps;
  for (const auto& d : diag) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
    maps.push_back(m);
  }
  return BundleOperator(b, std::move(maps));
}

// Per-atom signed values of a decomposition, in the order of the class.
std::vector<double> values_at(const SpectralDecomposition& d, std::size_t atom) {
  for (const auto& cls : d.classes) {
    if (!d.rank_partition[cls.rank][atom]) continue;
    std::vector<double> out;
    for (const auto& f : cls.eigenvalues) out.push_back(f[atom].real());
    return out;
  }
  return {};
}

}  // namespace

TEST_CASE("cyclic Schmidt decomposition reconstructs and orders") {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto b = testing::random_bundle(rng, rng.index(1, 5), rng.index(1, 5));
    const auto t = testing::random_operator(rng, b);
    const auto d = cyclic_schmidt(t);
    CHECK(d.rank_partition.size() == b->dim() + 1);
    CHECK(operator_norm(t - d.reconstruct()) <= 1e-10 * operator_norm(t));
    for (const auto& cls : d.classes) {
      const Idempotent& pi = d.rank_partition[cls.rank];
      for (std::size_t a = 0; a < b->atoms(); ++a) {
        if (!pi[a]) continue;
        const auto oracle = testing::oracle_singular_values(t.fiber(a), b->grid.quad_weights());
        for (std::size_t n = 0; n < cls.rank; ++n) {
          CHECK(std::abs(cls.values[n][a].real() - oracle[n]) <= 1e-10 * oracle[0]);
          if (n + 1 < cls.rank) CHECK(cls.values[n][a].real() >= cls.values[n + 1][a].real());
        }
        for (std::size_t i = 0; i < cls.rank; ++i) {
          for (std::size_t j = 0; j < cls.rank; ++j) {
            const double expect = i == j ? 1.0 : 0.0;
            CHECK(std::abs(inner_product(cls.left[i], cls.left[j])[a] - expect) <= 1e-12);
            CHECK(std::abs(inner_product(cls.right[i], cls.right[j])[a] - expect) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("cyclic Schmidt: rank partition of a rank-deficient operator") {
  const auto b = unit_bundle(3, 3);
  const auto t = diagonal_operator(b, {{1, 0, 0}, {0, 0, 0}, {2, 3, 4}});
  const auto d = cyclic_schmidt(t);
  CHECK(d.rank_partition[0] == Idempotent({false, true, false}));
  CHECK(d.rank_partition[1] == Idempotent({true, false, false}));
  CHECK(d.rank_partition[3] == Idempotent({false, false, true}));
  REQUIRE(d.classes.size() == 2);
  CHECK(d.classes[1].values[0][2] == Complex(4.0));
}

TEST_CASE("positive self-adjoint form") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = testing::random_bundle(rng, rng.index(1, 4), rng.index(1, 5));
    const auto a = testing::random_operator(rng, b);
    std::vector<ComplexMatrix> maps;
    for (std::size_t i = 0; i < b->atoms(); ++i) maps.push_back(adjoint(a).fiber(i) * a.fiber(i));
    const BundleOperator positive(b, maps);
    const auto d = positive_selfadjoint_form(positive);
    CHECK(operator_norm(positive - d.reconstruct()) <= 1e-10 * operator_norm(positive));
    for (const auto& cls : d.classes) {
      for (const auto& f : cls.eigenvalues) {
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i].real() >= 0.0);
      }
    }
  }
  const auto b = unit_bundle(1, 2);
  CHECK_THROWS_AS(positive_selfadjoint_form(diagonal_operator(b, {{1, -1}})), Error);
}

TEST_CASE("merge example diag(3, -2, 1)") {
  const auto b = unit_bundle(1, 3);
  const auto d = eigendecompose(diagonal_operator(b, {{3, -2, 1}}));
  REQUIRE(d.classes.size() == 1);
  CHECK(d.classes[0].rank == 3);
  CHECK(values_at(d, 0) == std::vector<double>{3, -2, 1});
  const auto& v = d.classes[0].vectors;
  CHECK(std::abs(v[0].fiber(0)(0) - 1.0) <= 1e-15);
  CHECK(std::abs(v[1].fiber(0)(1) - 1.0) <= 1e-15);
  CHECK(std::abs(v[2].fiber(0)(2) - 1.0) <= 1e-15);
}

TEST_CASE("merge ties keep the positive term first") {
  const auto b = unit_bundle(1, 2);
  const auto d = eigendecompose(diagonal_operator(b, {{-2, 2}}));
  CHECK(values_at(d, 0) == std::vector<double>{2, -2});
}

TEST_CASE("merge with one atom positive and one negative") {
  const auto b = unit_bundle(2, 1);
  MergeTrace trace;
  const auto parts = split_parts(diagonal_operator(b, {{5}, {-5}}));
  const auto d = selfadjoint_merge(parts, &trace);
  REQUIRE(d.classes.size() == 1);
  CHECK(d.classes[0].eigenvalues[0] == StepFunction({5.0, -5.0}));
  REQUIRE(trace.steps.size() == 1);
  CHECK(trace.steps[0].z[0] == Idempotent({false, true}));
}

TEST_CASE("merge with interleaved atoms") {
  // atom 0: +4, +1, -3   atom 1: +1, -6, -0.5
  const auto b = unit_bundle(2, 3);
  const auto d = eigendecompose(diagonal_operator(b, {{4, 1, -3}, {1, -6, -0.5}}));
  CHECK(values_at(d, 0) == std::vector<double>{4, -3, 1});
  CHECK(values_at(d, 1) == std::vector<double>{-6, 1, -0.5});
}

TEST_CASE("zero operator has only the rank-zero class") {
  const auto b = unit_bundle(3, 2);
  const auto d = eigendecompose(BundleOperator::zero(b));
  CHECK(d.classes.empty());
  CHECK(d.rank_partition[0] == Idempotent::full(3));
  CHECK(operator_norm(d.reconstruct()) == 0.0);
}

TEST_CASE("merge agrees with the signed oracle") {
  Rng rng(3);
  const Config config;
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = testing::random_bundle(rng, rng.index(2, 8), rng.index(2, 6));
    const auto t = testing::random_selfadjoint(rng, b);
    const auto d = eigendecompose(t, config);
    for (std::size_t a = 0; a < b->atoms(); ++a) {
      const auto oracle = testing::oracle_signed_spectrum(t.fiber(a), config.rank_tol);
      const auto got = values_at(d, a);
      REQUIRE(got.size() == oracle.size());
      for (std::size_t n = 0; n < got.size(); ++n) CHECK(std::abs(got[n] - oracle[n]) <= 1e-12 * std::abs(oracle[0]) + 1e-12);
    }
    CHECK(operator_norm(t - d.reconstruct()) <= 1e-10 * operator_norm(t));
  }
}

TEST_CASE("chain and ordering identities on the merge trace") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = testing::random_bundle(rng, rng.index(2, 6), rng.index(2, 5));
    const auto parts = split_parts(testing::random_selfadjoint(rng, b));
    MergeTrace trace;
    const auto merged = selfadjoint_merge(parts, &trace);
    for (const auto& step : trace.steps) {
      for (std::size_t n = 1; n < step.z.size(); ++n) CHECK(step.z[n - 1].leq(step.z[n]));
      for (std::size_t n = 0; n + 1 < step.values.size(); ++n) {
        const auto cur = step.values[n].abs();
        const auto next = step.values[n + 1].abs();
        const Idempotent lo = n == 0 ? Idempotent::empty(b->atoms()) : step.z[n - 1];
        const Idempotent band = step.z[n].minus(lo);
        const Idempotent rest = step.z[n].complement();
        for (const Idempotent* piece : {&lo, &band, &rest}) {
          for (std::size_t a = 0; a < b->atoms(); ++a) {
            if ((*piece)[a]) CHECK(cur[a].real() >= next[a].real());
          }
        }
      }
    }
    const auto report = verify_merge_identity(parts, merged);
    CHECK(report.test_vector_deviation <= 1e-12 * std::max(1.0, operator_norm(parts.assemble())));
  }
}

TEST_CASE("malformed signed sequence pairs are rejected") {
  const auto b = unit_bundle(1, 2);
  SignedSequencePair parts{b, {{{1.0, ComplexVector::Unit(2, 0)}, {2.0, ComplexVector::Unit(2, 1)}}}, {{}}};
  CHECK_THROWS_AS(selfadjoint_merge(parts), Error);
  parts.pos[0] = {{-1.0, ComplexVector::Unit(2, 0)}};
  CHECK_THROWS_AS(selfadjoint_merge(parts), Error);
  parts.pos[0] = {{1.0, ComplexVector::Unit(3, 0)}};
  CHECK_THROWS_AS(selfadjoint_merge(parts), Error);
}

TEST_CASE("non self-adjoint input is rejected") {
  const auto b = unit_bundle(1, 2);
  ComplexMatrix m(2, 2);
  m << 1, 2, 0, 1;
  CHECK_THROWS_AS(eigendecompose(BundleOperator(b, {m})), Error);
  // Hermitian as a matrix but not for a non-uniform quadrature.
  const auto weighted = make_bundle(MeasureSpace::uniform(1), SGrid({"a", "b"}, {1.0, 2.0}));
  ComplexMatrix h(2, 2);
  h << 1, 1, 1, 1;
  CHECK_THROWS_AS(eigendecompose(BundleOperator(weighted, {h})), Error);
}

TEST_CASE("degenerate eigenvalues still give orthonormal families") {
  const auto b = unit_bundle(1, 4);
  Rng rng(5);
  const ComplexMatrix q = Eigen::HouseholderQR<ComplexMatrix>(testing::random_matrix(rng, 4)).householderQ();
  Eigen::VectorXcd diag(4);
  diag << 2.0, 2.0, -2.0, 1.0;
  const BundleOperator t(b, {q * diag.asDiagonal() * q.adjoint()});
  const auto d = eigendecompose(t);
  REQUIRE(d.classes.size() == 1);
  const auto& v = d.classes[0].vectors;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(inner_product(v[i], v[j])[0] - (i == j ? 1.0 : 0.0)) <= 1e-12);
  }
  // The three terms of modulus 2 tie only up to rounding, so their relative
  // order is not fixed; magnitudes and the sign count are.
  auto got = values_at(d, 0);
  REQUIRE(got.size() == 4);
  CHECK(std::count_if(got.begin(), got.begin() + 3, [](double x) { return x < 0; }) == 1);
  for (std::size_t n = 0; n < 3; ++n) CHECK(std::abs(got[n]) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(got[3] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(operator_norm(t - d.reconstruct()) <= 1e-12);
}

TEST_CASE("verify_merge_identity") {
  const auto b = unit_bundle(1, 3);
  const auto parts = split_parts(diagonal_operator(b, {{3, -2, 1}}));
  auto merged = selfadjoint_merge(parts);
  CHECK(verify_merge_identity(parts, merged).max_deviation() <= 1e-13);
  CHECK(verify_merge_identity(parts, merged).test_vectors == 3);

  merged.classes[0].eigenvalues[1] = StepFunction({-2.5});
  CHECK(verify_merge_identity(parts, merged).test_vector_deviation == doctest::Approx(0.5));

  const auto zero = split_parts(BundleOperator::zero(b));
  CHECK(verify_merge_identity(zero, selfadjoint_merge(zero)).max_deviation() == 0.0);
}

TEST_CASE("split_parts") {
  const auto b = unit_bundle(1, 3);
  const auto parts = split_parts(diagonal_operator(b, {{3, -2, 1}}));
  REQUIRE(parts.pos[0].size() == 2);
  REQUIRE(parts.neg[0].size() == 1);
  CHECK(parts.pos[0][0].value == doctest::Approx(3.0));
  CHECK(parts.pos[0][1].value == doctest::Approx(1.0));
  CHECK(parts.neg[0][0].value == doctest::Approx(2.0));
  CHECK(operator_norm(parts.assemble() - diagonal_operator(b, {{3, -2, 1}})) <= 1e-14);
}
