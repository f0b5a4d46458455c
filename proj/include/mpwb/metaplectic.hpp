#pragma once

#include "mpwb/halfform.hpp"

#include <cmath>
#include <utility>

namespace mpwb {

// Splits the columns of X along E + conj(E): X = F.M + conj(F).N in the
// canonical frame F of p.
inline TransferData split_on_polarization(const PositivePolarization& p, const CMat& x) {
  const Eigen::Index n = p.space.n;
  CMat lhs(2 * n, 2 * n);
  lhs.leftCols(n) = p.frame;
  lhs.rightCols(n) = p.frame.conjugate();
  CMat sol = lhs.fullPivLu().solve(x);
  TransferData t;
  t.m = sol.topRows(n);
  t.n = sol.bottomRows(n);
  t.d = t.m.determinant();
  return t;
}

// det of pi.g restricted to E (frame F): g.F = F.M + conj(F).N, value det M.
inline Complex det_pi_g_on_E(const Symplectomorphism& g, const PositivePolarization& ref) {
  return split_on_polarization(ref, g.m.cast<Complex>() * ref.frame).d;
}

// Element of the metaplectic group attached to (S, E): a pair (g, z) with
// z^2 . det(pi.g|_E) = 1.  The reference polarization fixes the gauge.
struct MetaplecticElement {
  Symplectomorphism g;
  Complex z;
  PositivePolarization ref;
};

inline double mp_invariant_residual(const Symplectomorphism& g, Complex z,
                                    const PositivePolarization& ref) {
  return std::abs(z * z * det_pi_g_on_E(g, ref) - 1.0);
}

inline MetaplecticElement make_mp_element(const Symplectomorphism& g, Complex z,
                                          const PositivePolarization& ref,
                                          double tol = kDefaultTol) {
  check_domain(g.space.n == ref.space.n, "make_mp_element: dimension mismatch");
  check_domain(mp_invariant_residual(g, z, ref) <= tol,
               "make_mp_element: z^2.det(pi g|E) != 1");
  return MetaplecticElement{g, z, ref};
}

// The two lifts (g, +z0) and (g, -z0); z0 is the principal square root of
// 1/det(pi.g|_E).
inline std::pair<MetaplecticElement, MetaplecticElement> mp_lift(const Symplectomorphism& g,
                                                                 const PositivePolarization& ref) {
  Complex det = det_pi_g_on_E(g, ref);
  check_domain(std::abs(det) > 0.0, "mp_lift: degenerate projection determinant");
  Complex z0 = std::sqrt(1.0 / det);
  return {MetaplecticElement{g, z0, ref}, MetaplecticElement{g, -z0, ref}};
}

// Group law: (g2, z2).(g1, z1) = (g2 g1, zeta^{1/2}(g2 g1 E, g2 E, E).z2.z1).
inline MetaplecticElement mp_compose(const MetaplecticElement& e2, const MetaplecticElement& e1,
                                     double tol = kDefaultTol) {
  check_domain(same_polarization(e1.ref, e2.ref, tol), "mp_compose: reference mismatch");
  Symplectomorphism g{e1.g.space, e2.g.m * e1.g.m};
  PositivePolarization p_full = pushforward(g, e1.ref);
  PositivePolarization p_half = pushforward(e2.g, e1.ref);
  Complex c = zeta_sqrt(p_full, p_half, e1.ref);
  return MetaplecticElement{g, c * e2.z * e1.z, e1.ref};
}

inline MetaplecticElement mp_identity(const PositivePolarization& ref) {
  Mat id = Mat::Identity(2 * ref.space.n, 2 * ref.space.n);
  return MetaplecticElement{Symplectomorphism{ref.space, id}, Complex{1.0, 0.0}, ref};
}

// Inverse = adjoint (the representation is unitary): (g^{-1}, conj z).
inline MetaplecticElement mp_inverse(const MetaplecticElement& e) {
  Eigen::FullPivLU<Mat> lu(e.g.m);
  check_internal(lu.isInvertible(), "mp_inverse: singular symplectomorphism");
  return MetaplecticElement{Symplectomorphism{e.g.space, lu.inverse()}, std::conj(e.z), e.ref};
}

// Cayley-type matrix A(g) = (1/2)(I+g)(I-g)^{-1}.j, defined when 1 is not an
// eigenvalue of g.  G-symmetric with real spectrum, so (1/2)I + iA has spectrum
// on the line Re = 1/2.
inline Mat a_matrix(const Symplectomorphism& g, const PositivePolarization& ref) {
  const Eigen::Index d = 2 * g.space.n;
  Mat id = Mat::Identity(d, d);
  Eigen::FullPivLU<Mat> lu(id - g.m);
  check_domain(lu.isInvertible(), "a_matrix: 1 is an eigenvalue of g (degenerate fixed point)");
  Mat j = complex_structure(ref);
  Mat a = 0.5 * (id + g.m) * lu.inverse() * j;
  Mat metric = g.space.omega * j;
  check_internal(approx_equal(metric * a, Mat(a.transpose() * metric), 1e-7),
                 "a_matrix: result not G-symmetric");
  return a;
}

// Positive branch of det^{1/2}((1/2)I + iA): exp of half the principal log-trace.
// Equals (1/2)^n at A = 0 and is continuous wherever the spectrum stays in the
// right half-plane (always, for A coming from a_matrix).
inline Complex det_sqrt_half_plus_iA(const Mat& a, const PositivePolarization& /*ref*/) {
  const Eigen::Index d = a.rows();
  CMat b = 0.5 * CMat::Identity(d, d) + kI * a.cast<Complex>();
  return std::exp(0.5 * log_det_principal(b, "det_sqrt_half_plus_iA"));
}

struct IndexResult {
  int m = 0;           // index mod 4
  double residual = 0; // distance of the witness from i^m
  Complex witness;     // z . det^{1/2}((1/2)I + iA) . |det(I-g)|^{1/2}
};

// The integer m with z.det^{1/2}((1/2)I + iA(g)) = i^m / |det(I-g)|^{1/2}.
inline IndexResult mp_index(const MetaplecticElement& e, double residual_tol = kResidualTol) {
  Mat a = a_matrix(e.g, e.ref);
  Complex ds = det_sqrt_half_plus_iA(a, e.ref);
  const Eigen::Index d = 2 * e.g.space.n;
  double det_ig = (Mat::Identity(d, d) - e.g.m).determinant();
  Complex w = e.z * ds * std::sqrt(std::abs(det_ig));
  int m = static_cast<int>(std::llround(std::arg(w) * 2.0 / kPi)) & 3;
  IndexResult r;
  r.m = m;
  r.witness = w;
  r.residual = std::abs(w - i_power(m));
  check_domain(r.residual <= residual_tol, "mp_index: residual exceeds tolerance");
  return r;
}

// n = 1 shortcut: m = k + (1 - (-1)^{k+eps})/2 where arg z lands in
// [k.pi/2, (k+1).pi/2) and eps records the component (0 iff tr g > 2).
inline int mp_index_2d(const MetaplecticElement& e) {
  check_domain(e.g.space.n == 1, "mp_index_2d: defined for n = 1 only");
  double trace = e.g.m.trace();
  // det(I - g) = 2 - tr g for n = 1, so trace 2 is exactly the degenerate case
  check_domain(std::abs(2.0 - trace) > 1e-12, "mp_index_2d: degenerate (trace = 2)");
  double theta = std::arg(e.z);
  if (theta < 0.0) theta += 2.0 * kPi;
  int k = static_cast<int>(std::floor(theta / (0.5 * kPi)));
  if (k > 3) k = 0;  // arg wrapped to 2.pi by round-off
  int eps = trace > 2.0 ? 0 : 1;
  return (k + (((k + eps) % 2 == 0) ? 0 : 1)) % 4;
}

// Chart of the metaplectic group over the parametrized SL(2,R):
// g(theta,u,v) = (1-u^2-v^2)^{-1/2} [[cos t + u, -sin t + v], [sin t + v, cos t - u]].
// The pair (g(-2.theta, u, v), e^{i.theta}(1-u^2-v^2)^{1/4}) satisfies the group
// invariant; anchors: (pi/2,0,0) -> (-I, i), (pi,0,0) -> (I, -1).
inline MetaplecticElement sl2_parametrization(double theta, double u, double v) {
  double r2 = u * u + v * v;
  check_domain(r2 < 1.0, "sl2_parametrization: u^2 + v^2 must be < 1");
  SymplecticSpace s = standard_space(1);
  double scale = 1.0 / std::sqrt(1.0 - r2);
  double t = -2.0 * theta;
  Mat g(2, 2);
  g << std::cos(t) + u, -std::sin(t) + v, std::sin(t) + v, std::cos(t) - u;
  g *= scale;
  Complex z = std::polar(std::pow(1.0 - r2, 0.25), theta);
  return make_mp_element(make_symplectomorphism(s, g), z, standard_polarization(s), 1e-8);
}

// Direct product of elements; the index is additive over it.
inline MetaplecticElement mp_product(const MetaplecticElement& e1, const MetaplecticElement& e2) {
  Symplectomorphism g = sp_direct_sum(e1.g, e2.g);
  PositivePolarization ref = product_polarization(e1.ref, e2.ref);
  return make_mp_element(g, e1.z * e2.z, ref, 1e-7);
}

// The real 2n x 2n matrix acting as h on E and conj(h) on conj(E).
inline Mat iota_of_unitary(const CMat& h, const PositivePolarization& ref) {
  const Eigen::Index n = ref.space.n;
  CMat basis(2 * n, 2 * n);
  basis.leftCols(n) = ref.frame;
  basis.rightCols(n) = ref.frame.conjugate();
  CMat action(2 * n, 2 * n);
  action.leftCols(n) = ref.frame * h;
  action.rightCols(n) = ref.frame.conjugate() * h.conjugate();
  CMat g = basis.transpose().fullPivLu().solve(action.transpose()).transpose();
  check_internal(g.imag().norm() <= 1e-10 * std::max(1.0, g.norm()),
                 "iota_of_unitary: embedding not real");
  return g.real();
}

// Restriction of the metaplectic cover to the unitary group of (E, Gram):
// (h, z) with z^2 = det h embeds as (iota(h), 1/z).
inline MetaplecticElement unitary_embed(const CMat& h, Complex z,
                                        const PositivePolarization& ref,
                                        double tol = kDefaultTol) {
  const Eigen::Index n = ref.space.n;
  check_domain(h.rows() == n && h.cols() == n, "unitary_embed: h must be n x n");
  check_domain((h.adjoint() * h - CMat::Identity(n, n)).norm() <= tol * std::max(1.0, h.norm()),
               "unitary_embed: h not unitary");
  check_domain(approx_equal(z * z, Complex(h.determinant()), tol),
               "unitary_embed: z^2 != det h");
  Symplectomorphism g = make_symplectomorphism(ref.space, iota_of_unitary(h, ref), 1e-8);
  return make_mp_element(g, 1.0 / z, ref, 1e-8);
}

// Metalinear embedding: h in GL(n,R) acting block-diagonally as (h, h^{-T}) on
// (q, p) preserves the standard polarization's Lagrangian pair; the lift with
// z'/z real positive exists because det(pi g|E) = det((h + h^{-T})/2) has the
// sign of det h.
inline MetaplecticElement metalinear_embed(const Mat& h, Complex z,
                                           const PositivePolarization& ref,
                                           double tol = kDefaultTol) {
  const Eigen::Index n = ref.space.n;
  check_domain(h.rows() == n && h.cols() == n, "metalinear_embed: h must be n x n");
  Eigen::FullPivLU<Mat> lu(h);
  check_domain(lu.isInvertible(), "metalinear_embed: h singular");
  check_domain(approx_equal(z * z, Complex(h.determinant()), tol),
               "metalinear_embed: z^2 != det h");
  Mat g = Mat::Zero(2 * n, 2 * n);
  g.topLeftCorner(n, n) = h;
  g.bottomRightCorner(n, n) = lu.inverse().transpose();
  Symplectomorphism gs = make_symplectomorphism(ref.space, g, 1e-9);
  auto [plus, minus] = mp_lift(gs, ref);
  Complex ratio = plus.z / z;
  check_internal(std::abs(ratio.imag()) <= 1e-7 * std::abs(ratio),
                 "metalinear_embed: z'/z not real");
  return ratio.real() > 0.0 ? plus : minus;
}

// Element of the 2p-fold generalized cover: z^{2p} . det^p(pi g|E) = 1.
struct GeneralizedMetaplecticElement {
  Symplectomorphism g;
  Complex z;
  int p = 1;
  PositivePolarization ref;
};

inline int p_prime(int p) { return (p % 2 == 0) ? p : 2 * p; }

inline GeneralizedMetaplecticElement make_mp_p_element(const Symplectomorphism& g, Complex z,
                                                       int p, const PositivePolarization& ref,
                                                       double tol = 1e-7) {
  check_domain(p >= 1, "make_mp_p_element: p must be >= 1");
  Complex det = det_pi_g_on_E(g, ref);
  Complex w = std::pow(z * z * det, p);
  check_domain(std::abs(w - 1.0) <= tol * p, "make_mp_p_element: (z^2 det)^p != 1");
  return GeneralizedMetaplecticElement{g, z, p, ref};
}

// Cover map Mp x U_{2p} -> Mp_p: multiply the metaplectic z by a 2p-th root of
// unity.  Kernel = {((id,1),1), ((id,-1),-1)}.
inline GeneralizedMetaplecticElement mp_p_from_cover(const MetaplecticElement& e, Complex u,
                                                     int p, double tol = kDefaultTol) {
  check_domain(p >= 1, "mp_p_from_cover: p must be >= 1");
  check_domain(std::abs(std::pow(u, 2 * p) - 1.0) <= tol * (2 * p),
               "mp_p_from_cover: u is not a 2p-th root of unity");
  return make_mp_p_element(e.g, e.z * u, p, e.ref);
}

struct IndexPResult {
  int m = 0;  // index mod 2p'
  int modulus = 0;
  double residual = 0;
  Complex witness;
};

// Generalized index: z.det^{1/2}((1/2)I + iA) = e^{i.pi.m_p/p'} / |det(I-g)|^{1/2},
// m_p taken mod 2p'.  For p = 1 it coincides with mp_index.
inline IndexPResult mp_p_index(const GeneralizedMetaplecticElement& e,
                               double residual_tol = kResidualTol) {
  Mat a = a_matrix(e.g, e.ref);
  Complex ds = det_sqrt_half_plus_iA(a, e.ref);
  const Eigen::Index d = 2 * e.g.space.n;
  double det_ig = (Mat::Identity(d, d) - e.g.m).determinant();
  Complex w = e.z * ds * std::sqrt(std::abs(det_ig));
  int pp = p_prime(e.p);
  int mod = 2 * pp;
  int m = static_cast<int>(std::llround(std::arg(w) * pp / kPi));
  m = ((m % mod) + mod) % mod;
  IndexPResult r;
  r.m = m;
  r.modulus = mod;
  r.witness = w;
  r.residual = std::abs(w - std::polar(1.0, kPi * m / pp));
  check_domain(r.residual <= residual_tol, "mp_p_index: residual exceeds tolerance");
  return r;
}

}  // namespace mpwb
