#include "kaplansky/io.hpp"

#include <string>

namespace kaplansky::io {

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::Schema, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

const json& array_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) schema_error(std::string("field '") + key + "' must be an array");
  return v;
}

double number(const json& j, const char* what) {
  if (!j.is_number()) schema_error(std::string(what) + " must be a number");
  return j.get<double>();
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) schema_error("complex numbers are [re, im] pairs");
  return {number(j[0], "real part"), number(j[1], "imaginary part")};
}

std::string identifier(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  schema_error("identifiers must be strings or numbers");
}

json vector_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

ComplexVector vector_from(const json& j, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) schema_error("vector length differs from the grid size");
  ComplexVector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i)) = complex_from(j[i]);
  return v;
}

json matrix_json(const ComplexMatrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < a.cols(); ++k) row.push_back(complex_json(a(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Full n x n rows, or with allow_upper the triangle rows i -> columns i..n-1
// mirrored by conjugation.
ComplexMatrix matrix_from(const json& j, std::size_t n, bool allow_upper) {
  if (!j.is_array() || j.size() != n) schema_error("matrix must have one row per grid point");
  const auto d = static_cast<Eigen::Index>(n);
  ComplexMatrix a(d, d);
  bool square = true;
  bool upper = allow_upper;
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array()) schema_error("matrix rows must be arrays");
    square = square && j[i].size() == n;
    upper = upper && j[i].size() == n - i;
  }
  if (square) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = complex_from(j[i][k]);
    }
    return a;
  }
  if (!upper) schema_error("matrix rows have the wrong length");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i; k < n; ++k) {
      const Complex z = complex_from(j[i][k - i]);
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(k);
      a(r, c) = z;
      a(c, r) = std::conj(z);
    }
  }
  return a;
}

json mask_json(const Idempotent& pi) {
  json out = json::array();
  for (bool b : pi.mask()) out.push_back(b ? 1 : 0);
  return out;
}

std::vector<ComplexMatrix> matrices_from(const json& j, std::size_t atoms, std::size_t n, bool allow_upper) {
  if (!j.is_array() || j.size() != atoms) schema_error("expected one matrix per atom");
  std::vector<ComplexMatrix> out;
  out.reserve(atoms);
  for (const auto& m : j) out.push_back(matrix_from(m, n, allow_upper));
  return out;
}

PartitionOfUnity partition_from(const json& j) {
  if (!j.is_array() || j.empty()) schema_error("partition must be a nonempty list of masks");
  std::vector<Idempotent> parts;
  for (const auto& m : j) parts.push_back(idempotent_from_json(m));
  return PartitionOfUnity(std::move(parts));
}

json partition_json(const PartitionOfUnity& p) {
  json out = json::array();
  for (const auto& part : p.parts()) out.push_back(mask_json(part));
  return out;
}

template <class Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    schema_error(e.what());
  }
}

}  // namespace

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

void require_schema(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != kSchema) {
    schema_error("document is not tagged \"schema\": \"kaplansky/v1\"");
  }
}

json to_json(const MeasureSpace& space) { return {{"atoms", space.atoms()}, {"weights", space.weights()}}; }

json to_json(const SGrid& grid) { return {{"points", grid.points()}, {"quad_weights", grid.quad_weights()}}; }

json to_json(const StepFunction& f) {
  json values = json::array();
  for (const auto& z : f.values()) values.push_back(complex_json(z));
  return {{"values", std::move(values)}};
}

json to_json(const Idempotent& pi) { return mask_json(pi); }

json to_json(const ModuleElement& xi) {
  json fibers = json::array();
  for (const auto& f : xi.fibers()) fibers.push_back(vector_json(f));
  return {{"fibers", std::move(fibers)}};
}

json to_json(const BundleOperator& t) {
  json maps = json::array();
  for (const auto& a : t.fiber_maps()) maps.push_back(matrix_json(a));
  return {{"schema", kSchema},
          {"space", to_json(t.bundle()->space)},
          {"grid", to_json(t.bundle()->grid)},
          {"fiber_maps", std::move(maps)}};
}

json to_json(const KernelBundle& kernel) {
  json samples = json::array();
  for (const auto& k : kernel.samples()) samples.push_back(matrix_json(k));
  return {{"schema", kSchema},
          {"space", to_json(kernel.bundle()->space)},
          {"grid", to_json(kernel.bundle()->grid)},
          {"selfadjoint", kernel.flagged_selfadjoint()},
          {"samples", std::move(samples)}};
}

json to_json(const MatrixField& x) {
  json fields = json::array();
  for (const auto& a : x.fibers()) fields.push_back(matrix_json(a));
  return {{"schema", kSchema}, {"space", to_json(x.space())}, {"dim", x.dim()}, {"fields", std::move(fields)}};
}

json to_json(const SpectralDecomposition& d) {
  json classes = json::array();
  for (const auto& cls : d.classes) {
    json values = json::array();
    json vectors = json::array();
    for (const auto& f : cls.eigenvalues) values.push_back(to_json(f));
    for (const auto& v : cls.vectors) vectors.push_back(to_json(v));
    classes.push_back({{"k", cls.rank},
                       {"atom_count", d.rank_partition[cls.rank].count()},
                       {"eigenvalues", std::move(values)},
                       {"vectors", std::move(vectors)}});
  }
  return {{"schema", kSchema},
          {"space", to_json(d.bundle->space)},
          {"grid", to_json(d.bundle->grid)},
          {"rank_partition", partition_json(d.rank_partition)},
          {"classes", std::move(classes)}};
}

json to_json(const CentralDiagonalForm& form) {
  json classes = json::array();
  for (const auto& cls : form.classes) {
    json values = json::array();
    json projections = json::array();
    json vectors = json::array();
    for (const auto& f : cls.values) values.push_back(to_json(f));
    for (const auto& p : cls.projections) {
      json fibers = json::array();
      for (const auto& m : p.field().fibers()) fibers.push_back(matrix_json(m));
      projections.push_back(std::move(fibers));
    }
    for (const auto& v : cls.vectors) vectors.push_back(to_json(v));
    classes.push_back({{"k", cls.rank},
                       {"atom_count", form.central_partition[cls.rank].count()},
                       {"values", std::move(values)},
                       {"projections", std::move(projections)},
                       {"vectors", std::move(vectors)}});
  }
  return {{"schema", kSchema},
          {"space", to_json(form.bundle->space)},
          {"dim", form.bundle->dim()},
          {"central_partition", partition_json(form.central_partition)},
          {"classes", std::move(classes)}};
}

MeasureSpace measure_space_from_json(const json& j) {
  return guarded([&] {
    std::vector<std::string> atoms;
    for (const auto& a : array_field(j, "atoms")) atoms.push_back(identifier(a));
    std::vector<double> weights;
    for (const auto& w : array_field(j, "weights")) weights.push_back(number(w, "atom weight"));
    return MeasureSpace(std::move(atoms), std::move(weights));
  });
}

SGrid grid_from_json(const json& j) {
  return guarded([&] {
    std::vector<std::string> points;
    for (const auto& p : array_field(j, "points")) points.push_back(identifier(p));
    std::vector<double> weights;
    for (const auto& w : array_field(j, "quad_weights")) weights.push_back(number(w, "quadrature weight"));
    return SGrid(std::move(points), std::move(weights));
  });
}

StepFunction step_function_from_json(const json& j) {
  return guarded([&] {
    std::vector<Complex> values;
    for (const auto& v : array_field(j, "values")) values.push_back(complex_from(v));
    return StepFunction(std::move(values));
  });
}

Idempotent idempotent_from_json(const json& j) {
  if (!j.is_array()) schema_error("masks are arrays of 0/1");
  std::vector<bool> mask;
  for (const auto& b : j) {
    if (b.is_boolean()) {
      mask.push_back(b.get<bool>());
    } else if (b.is_number_integer() && (b.get<int>() == 0 || b.get<int>() == 1)) {
      mask.push_back(b.get<int>() == 1);
    } else {
      schema_error("mask entries must be 0 or 1");
    }
  }
  return Idempotent(std::move(mask));
}

ModuleElement element_from_json(const json& j, const BundlePtr& bundle) {
  return guarded([&] {
    const json& fibers = array_field(j, "fibers");
    if (fibers.size() != bundle->atoms()) schema_error("element needs one fiber per atom");
    std::vector<ComplexVector> out;
    for (const auto& f : fibers) out.push_back(vector_from(f, bundle->dim()));
    return ModuleElement(bundle, std::move(out));
  });
}

BundleOperator operator_from_json(const json& j, const BundlePtr& bundle) {
  return guarded([&] {
    return BundleOperator(bundle, matrices_from(field(j, "fiber_maps"), bundle->atoms(), bundle->dim(), false));
  });
}

KernelBundle kernel_from_json(const json& j) {
  require_schema(j);
  return guarded([&] {
    BundlePtr bundle = make_bundle(measure_space_from_json(field(j, "space")), grid_from_json(field(j, "grid")));
    const bool selfadjoint = j.value("selfadjoint", false);
    auto samples = matrices_from(field(j, "samples"), bundle->atoms(), bundle->dim(), selfadjoint);
    return KernelBundle(std::move(bundle), std::move(samples), selfadjoint);
  });
}

MatrixField matrix_field_from_json(const json& j) {
  require_schema(j);
  return guarded([&] {
    MeasureSpace space = measure_space_from_json(field(j, "space"));
    const json& dim = field(j, "dim");
    if (!dim.is_number_unsigned() || dim.get<std::size_t>() == 0) schema_error("dim must be a positive integer");
    auto fields = matrices_from(field(j, "fields"), space.size(), dim.get<std::size_t>(), false);
    return MatrixField(std::move(space), std::move(fields));
  });
}

SpectralDecomposition spectral_decomposition_from_json(const json& j) {
  require_schema(j);
  return guarded([&] {
    BundlePtr bundle = make_bundle(measure_space_from_json(field(j, "space")), grid_from_json(field(j, "grid")));
    SpectralDecomposition d{bundle, partition_from(field(j, "rank_partition")), {}};
    for (const auto& c : array_field(j, "classes")) {
      SpectralClass cls;
      cls.rank = field(c, "k").get<std::size_t>();
      for (const auto& f : array_field(c, "eigenvalues")) cls.eigenvalues.push_back(step_function_from_json(f));
      for (const auto& v : array_field(c, "vectors")) cls.vectors.push_back(element_from_json(v, bundle));
      if (cls.rank >= d.rank_partition.size() || cls.eigenvalues.size() != cls.rank ||
          cls.vectors.size() != cls.rank) {
        schema_error("class k must list k eigenvalues and k vectors");
      }
      d.classes.push_back(std::move(cls));
    }
    return d;
  });
}

CentralDiagonalForm diagonal_form_from_json(const json& j) {
  require_schema(j);
  return guarded([&] {
    MeasureSpace space = measure_space_from_json(field(j, "space"));
    const std::size_t n = field(j, "dim").get<std::size_t>();
    BundlePtr bundle = make_bundle(std::move(space), SGrid::unit(n));
    CentralDiagonalForm form{bundle, partition_from(field(j, "central_partition")), {}};
    for (const auto& c : array_field(j, "classes")) {
      DiagonalClass cls;
      cls.rank = field(c, "k").get<std::size_t>();
      for (const auto& f : array_field(c, "values")) cls.values.push_back(step_function_from_json(f));
      for (const auto& p : array_field(c, "projections")) {
        cls.projections.emplace_back(MatrixField(bundle, matrices_from(p, bundle->atoms(), n, false)));
      }
      for (const auto& v : array_field(c, "vectors")) cls.vectors.push_back(element_from_json(v, bundle));
      if (cls.rank >= form.central_partition.size() || cls.values.size() != cls.rank ||
          cls.projections.size() != cls.rank || cls.vectors.size() != cls.rank) {
        schema_error("class k must list k values, projections and vectors");
      }
      form.classes.push_back(std::move(cls));
    }
    return form;
  });
}

}  // namespace kaplansky::io
