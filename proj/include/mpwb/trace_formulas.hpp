#pragma once

// Fixed-point trace formulas on finite fixed-point data.  Each datum carries
// the linearization g of the map at one transversal fixed point (acting on
// the standard model space with its standard polarization) together with the
// fiber traces of the auxiliary lifts: z for the half-form part, u (unit
// modulus) for the prequantum line raised to the k-th tensor power.
//
// The evaluators are plain linear-algebraic sums; they take the fixed-point
// data as given and never try to locate fixed points of a map themselves.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mpwb/core.hpp"
#include "mpwb/metaplectic.hpp"
#include "mpwb/symplectic.hpp"

namespace mpwb {

struct FixedPointDatum {
  Symplectomorphism g;        // linearized map at the fixed point
  Complex z;                  // half-form fiber trace
  Complex u;                  // prequantum fiber trace, |u| = 1
  std::optional<CMat> h;      // holomorphic tangent map (pi g on E, in the frame)
  std::optional<Complex> mp;  // metaplectic scalar of the lift, for the indexed variant
};

struct TraceQuery {
  int k = 1;  // tensor power of the prequantum line
  std::vector<FixedPointDatum> data;
};

namespace detail {

inline std::string datum_tag(std::size_t i) { return "datum #" + std::to_string(i); }

inline void require_transversal(const FixedPointDatum& d, std::size_t i, const char* who) {
  const Eigen::Index dim = 2 * d.g.space.n;
  double det_ig = (Mat::Identity(dim, dim) - d.g.m).determinant();
  check_domain(std::abs(det_ig) > 1e-12,
               std::string(who) + ": " + datum_tag(i) + " is not transversal (det(I - g) = 0)");
}

}  // namespace detail

// Validates the invariants a datum must satisfy; h, when given, is checked
// against the holomorphic block of g in the standard frame.
inline FixedPointDatum make_fixed_point_datum(const Symplectomorphism& g, Complex z, Complex u,
                                              std::optional<CMat> h = std::nullopt,
                                              std::optional<Complex> mp = std::nullopt) {
  check_input(std::abs(std::abs(u) - 1.0) <= 1e-9, "fixed point datum: |u| != 1");
  FixedPointDatum d{g, z, u, std::move(h), std::move(mp)};
  detail::require_transversal(d, 0, "fixed point datum");
  if (d.h) {
    PositivePolarization pol = standard_polarization(g.space);
    TransferData split = split_on_polarization(pol, g.m.cast<Complex>() * pol.frame);
    check_input(approx_equal(*d.h, split.m, 1e-8),
                "fixed point datum: h is not the holomorphic tangent block of g");
  }
  return d;
}

inline void validate_query(const TraceQuery& q, const char* who) {
  check_input(q.k >= 1, std::string(who) + ": k must be >= 1");
  check_input(!q.data.empty(), std::string(who) + ": empty fixed-point list");
  for (std::size_t i = 0; i < q.data.size(); ++i) {
    check_input(std::abs(std::abs(q.data[i].u) - 1.0) <= 1e-9,
                std::string(who) + ": " + detail::datum_tag(i) + " has |u| != 1");
  }
}

// Leading-order equivariant trace:  sum over fixed points of
//     z_x * det^{1/2}(I/2 + i A_x) * u_x^k,
// with A = (1/2)(I + g)(I - g)^{-1} j built from the standard complex
// structure.  The determinant square root rides the principal branch, which
// is the branch the index normalization fixes.
inline Complex trace_estimate(const TraceQuery& q) {
  validate_query(q, "trace_estimate");
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i < q.data.size(); ++i) {
    const FixedPointDatum& d = q.data[i];
    detail::require_transversal(d, i, "trace_estimate");
    PositivePolarization pol = standard_polarization(d.g.space);
    Mat a = a_matrix(d.g, pol);
    acc += d.z * det_sqrt_half_plus_iA(a, pol) * std::pow(d.u, q.k);
  }
  return acc;
}

// Indexed form of the same sum:  e^{i pi m_p / p'} u^k / |det(I - g)|^{1/2}
// per fixed point, with m_p the (generalized) index of the lift (g, mp).
// For p = 1 the phase is i^m.  Rewriting trace_estimate through the index
// equation gives exactly this, so the two agree whenever z is the metaplectic
// scalar of the datum's lift.
inline Complex trace_estimate_halfform(const TraceQuery& q, int p = 1) {
  validate_query(q, "trace_estimate_halfform");
  check_input(p >= 1, "trace_estimate_halfform: p must be >= 1");
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i < q.data.size(); ++i) {
    const FixedPointDatum& d = q.data[i];
    detail::require_transversal(d, i, "trace_estimate_halfform");
    check_input(d.mp.has_value(), "trace_estimate_halfform: " + detail::datum_tag(i) +
                                      " carries no metaplectic scalar");
    PositivePolarization pol = standard_polarization(d.g.space);
    GeneralizedMetaplecticElement lift = make_mp_p_element(d.g, *d.mp, p, pol);
    IndexPResult idx = mp_p_index(lift);
    const Eigen::Index dim = 2 * d.g.space.n;
    double det_ig = (Mat::Identity(dim, dim) - d.g.m).determinant();
    Complex phase = std::polar(1.0, kPi * idx.m / p_prime(p));
    acc += phase * std::pow(d.u, q.k) / std::sqrt(std::abs(det_ig));
  }
  return acc;
}

// Holomorphic Lefschetz sum:  z_x u_x^k / det(I - h_x^{-1}) over fixed points
// with holomorphic tangent map h_x.
inline Complex lefschetz_number(const TraceQuery& q) {
  validate_query(q, "lefschetz_number");
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i < q.data.size(); ++i) {
    const FixedPointDatum& d = q.data[i];
    check_input(d.h.has_value(),
                "lefschetz_number: " + detail::datum_tag(i) + " carries no holomorphic tangent");
    const CMat& h = *d.h;
    check_input(h.rows() == d.g.space.n && h.cols() == d.g.space.n,
                "lefschetz_number: " + detail::datum_tag(i) + " has a misshapen tangent map");
    Eigen::FullPivLU<CMat> lu(h);
    check_domain(lu.isInvertible(),
                 "lefschetz_number: " + detail::datum_tag(i) + " has singular tangent map");
    CMat h_inv = lu.inverse();
    Complex den = CMat(CMat::Identity(h.rows(), h.cols()) - h_inv).determinant();
    check_domain(std::abs(den) > 1e-12, "lefschetz_number: " + detail::datum_tag(i) +
                                            " is degenerate (det(I - h^{-1}) = 0)");
    acc += d.z * std::pow(d.u, q.k) / den;
  }
  return acc;
}

// --- sphere rotation model -------------------------------------------------
//
// Rotation of the sphere by angle theta, quantized at level k: the character
// of the k-dimensional irreducible representation, sin(k theta/2)/sin(theta/2),
// is the exact trace.  The fixed points are the two poles; the linearization
// rotates the tangent plane by +theta at one pole and -theta at the other,
// the prequantum fiber weights are the dual square-root weights e^{-+ i
// theta/2}, and the half-form scalars are the lifts continued along the
// rotation subgroup through the pole in question.  None of this is assumed
// correct: the character comparison is the oracle that validates it.

inline Mat rotation_matrix(double theta) {
  Mat r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

inline std::vector<FixedPointDatum> sphere_fixed_point_data(double theta) {
  check_domain(std::abs(std::sin(theta / 2.0)) > 1e-12, "sphere model: degenerate angle");
  SymplecticSpace s = standard_space(1);
  auto pole = [&](double angle) {
    Symplectomorphism g = make_symplectomorphism(s, rotation_matrix(angle));
    Complex z = -std::polar(1.0, -angle / 2.0);  // lift continued along the subgroup
    Complex u = std::polar(1.0, -angle / 2.0);
    CMat h(1, 1);
    h(0, 0) = std::polar(1.0, angle);
    return make_fixed_point_datum(g, z, u, h, z);
  };
  return {pole(theta), pole(-theta)};
}

struct SphereModelResult {
  double exact = 0;     // character of the k-dimensional irreducible
  Complex formula;      // two-pole half-form trace formula
  double difference = 0;
};

inline SphereModelResult sphere_model(double theta, int k) {
  check_input(k >= 1, "sphere_model: k must be >= 1");
  TraceQuery q{k, sphere_fixed_point_data(theta)};
  SphereModelResult out;
  out.exact = std::sin(k * theta / 2.0) / std::sin(theta / 2.0);
  out.formula = trace_estimate_halfform(q, 1);
  out.difference = std::abs(out.formula - Complex(out.exact, 0.0));
  return out;
}

}  // namespace mpwb
