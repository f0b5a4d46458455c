#pragma once

// JSON encoding of the library's domain objects, shared by the CLI and any
// file-based workflow.  Schema "mpwb/1": complex numbers are [re, im] pairs,
// matrices are row-major nested arrays whose entries are numbers (real) or
// [re, im] pairs (complex), and every document carries a top-level
// "schema": "mpwb/1" tag.  Malformed documents raise input errors that name
// the offending path; values that parse but violate mathematics (a
// non-symplectic g, a Siegel matrix without positive imaginary part) raise
// domain errors from the constructors they feed.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpwb/core.hpp"
#include "mpwb/halfform.hpp"
#include "mpwb/metaplectic.hpp"
#include "mpwb/symplectic.hpp"
#include "mpwb/trace_formulas.hpp"

namespace mpwb {

using Json = nlohmann::json;

inline constexpr const char* kSchemaTag = "mpwb/1";

namespace jsondetail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw input_error("schema error at " + path + ": " + what);
}

}  // namespace jsondetail

// ---- scalars ----------------------------------------------------------------

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    jsondetail::fail(path, "expected a number or an [re, im] pair");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

// ---- matrices ---------------------------------------------------------------

inline Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const CMat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMat cmat_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) jsondetail::fail(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) jsondetail::fail(path + "[0]", "expected a matrix row");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      jsondetail::fail(row_path, "expected a row of length " + std::to_string(cols));
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)],
                                  row_path + "[" + std::to_string(k) + "]");
    }
  }
  return m;
}

inline Mat mat_from_json(const Json& j, const std::string& path) {
  CMat m = cmat_from_json(j, path);
  if (m.imag().norm() != 0.0) jsondetail::fail(path, "expected a real matrix");
  return m.real();
}

// ---- document plumbing ------------------------------------------------------

inline void require_schema_tag(const Json& j) {
  if (!j.is_object()) jsondetail::fail("$", "expected a JSON object");
  if (j.contains("schema") && j["schema"] != kSchemaTag) {
    jsondetail::fail("$.schema", std::string("unsupported schema (want \"") + kSchemaTag + "\")");
  }
}

inline const Json& require_field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) jsondetail::fail(path + "." + key, "missing field");
  return j[key];
}

// ---- domain objects ---------------------------------------------------------

inline Symplectomorphism symplectomorphism_from_json(const Json& j, const std::string& path,
                                                     double tol = kDefaultTol) {
  Mat g = mat_from_json(j, path);
  if (g.rows() != g.cols() || g.rows() % 2 != 0 || g.rows() == 0) {
    jsondetail::fail(path, "expected a square matrix of even dimension");
  }
  return make_symplectomorphism(standard_space(g.rows() / 2), g, tol);
}

// A polarization field is either absent (standard), the string "standard", or
// a Siegel matrix.
inline PositivePolarization polarization_from_json(const Json& parent, const std::string& key,
                                                   const SymplecticSpace& s,
                                                   const std::string& path) {
  if (!parent.is_object() || !parent.contains(key)) return standard_polarization(s);
  const Json& j = parent[key];
  if (j.is_string()) {
    if (j.get<std::string>() != "standard") {
      jsondetail::fail(path + "." + key, "expected \"standard\" or a Siegel matrix");
    }
    return standard_polarization(s);
  }
  CMat z = cmat_from_json(j, path + "." + key);
  if (z.rows() != s.n || z.cols() != s.n) {
    jsondetail::fail(path + "." + key, "Siegel matrix has the wrong size");
  }
  return polarization_from_siegel(s, z);
}

// {g, z, ref?}: a metaplectic element in the gauge of "ref" (default standard).
inline MetaplecticElement mp_element_from_json(const Json& j, const std::string& path,
                                               double tol = kDefaultTol) {
  Symplectomorphism g = symplectomorphism_from_json(require_field(j, "g", path), path + ".g", tol);
  Complex z = complex_from_json(require_field(j, "z", path), path + ".z");
  PositivePolarization ref = polarization_from_json(j, "ref", g.space, path);
  return make_mp_element(g, z, ref, tol);
}

inline Json to_json(const MetaplecticElement& e) {
  return Json{{"g", to_json(e.g.m)}, {"z", to_json(e.z)}, {"ref", to_json(e.ref.siegel)}};
}

// {g, psi, source?, target?} or {g, z, ref?}: a morphism between Bargmann
// models, either given directly or as a metaplectic element acting on its
// reference model.
inline DMorphism dmorphism_from_json(const Json& j, const std::string& path,
                                     double tol = kDefaultTol) {
  Symplectomorphism g = symplectomorphism_from_json(require_field(j, "g", path), path + ".g", tol);
  if (j.contains("psi")) {
    Complex psi = complex_from_json(j["psi"], path + ".psi");
    PositivePolarization src = polarization_from_json(j, "source", g.space, path);
    PositivePolarization tgt = polarization_from_json(j, "target", g.space, path);
    return make_dmorphism(g, src, tgt, psi, tol);
  }
  if (j.contains("z")) {
    Complex z = complex_from_json(j["z"], path + ".z");
    PositivePolarization ref = polarization_from_json(j, "ref", g.space, path);
    return make_dmorphism(g, ref, ref, z, tol);
  }
  jsondetail::fail(path, "expected either \"psi\" or \"z\"");
}

// {g, z, u, h?, mp?}: one fixed-point datum; "mp" is the metaplectic scalar
// of the lift at that fixed point.
inline FixedPointDatum fixed_point_datum_from_json(const Json& j, const std::string& path) {
  Symplectomorphism g = symplectomorphism_from_json(require_field(j, "g", path), path + ".g");
  Complex z = complex_from_json(require_field(j, "z", path), path + ".z");
  Complex u = complex_from_json(require_field(j, "u", path), path + ".u");
  std::optional<CMat> h;
  if (j.contains("h")) h = cmat_from_json(j["h"], path + ".h");
  std::optional<Complex> mp;
  if (j.contains("mp")) mp = complex_from_json(j["mp"], path + ".mp");
  return make_fixed_point_datum(g, z, u, std::move(h), mp);
}

// {k, data: [...]}
inline TraceQuery trace_query_from_json(const Json& j, const std::string& path) {
  const Json& k = require_field(j, "k", path);
  if (!k.is_number_integer() || k.get<long long>() < 1) {
    jsondetail::fail(path + ".k", "expected a positive integer");
  }
  const Json& data = require_field(j, "data", path);
  if (!data.is_array() || data.empty()) {
    jsondetail::fail(path + ".data", "expected a non-empty array");
  }
  TraceQuery q;
  q.k = k.get<int>();
  for (std::size_t i = 0; i < data.size(); ++i) {
    q.data.push_back(
        fixed_point_datum_from_json(data[i], path + ".data[" + std::to_string(i) + "]"));
  }
  return q;
}

}  // namespace mpwb
