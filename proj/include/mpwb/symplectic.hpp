#pragma once

#include "mpwb/core.hpp"

namespace mpwb {

// (R^{2n}, omega) in a fixed Darboux basis (q_1..q_n, p_1..p_n):
// omega((q,p),(q',p')) = q.p' - p.q', i.e. Omega = [[0, I], [-I, 0]].
struct SymplecticSpace {
  Eigen::Index n = 0;
  Mat omega;
};

inline SymplecticSpace standard_space(Eigen::Index n) {
  check_domain(n >= 1, "standard_space: n must be >= 1");
  SymplecticSpace s;
  s.n = n;
  s.omega = Mat::Zero(2 * n, 2 * n);
  s.omega.topRightCorner(n, n) = Mat::Identity(n, n);
  s.omega.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return s;
}

// Direct product, keeping the standard block form: q = (q_1, q_2), p = (p_1, p_2).
inline SymplecticSpace product_space(const SymplecticSpace& a, const SymplecticSpace& b) {
  return standard_space(a.n + b.n);
}

// Reorders a block-diagonal pair of 2n_i x 2n_i matrices into the product
// space's (q_1, q_2, p_1, p_2) coordinate order.  Works for real or complex.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> interleave_direct_sum(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m1,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m2) {
  const Eigen::Index n1 = m1.rows() / 2, n2 = m2.rows() / 2;
  const Eigen::Index n = n1 + n2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(2 * n, 2 * n);
  // blocks: (q1|q2|p1|p2) rows/cols map from (q1|p1) and (q2|p2)
  out.block(0, 0, n1, n1) = m1.block(0, 0, n1, n1);
  out.block(0, n, n1, n1) = m1.block(0, n1, n1, n1);
  out.block(n, 0, n1, n1) = m1.block(n1, 0, n1, n1);
  out.block(n, n, n1, n1) = m1.block(n1, n1, n1, n1);
  out.block(n1, n1, n2, n2) = m2.block(0, 0, n2, n2);
  out.block(n1, n + n1, n2, n2) = m2.block(0, n2, n2, n2);
  out.block(n + n1, n1, n2, n2) = m2.block(n2, 0, n2, n2);
  out.block(n + n1, n + n1, n2, n2) = m2.block(n2, n2, n2, n2);
  return out;
}

template <typename DerivedX, typename DerivedY>
auto symplectic_pairing(const SymplecticSpace& s, const Eigen::MatrixBase<DerivedX>& x,
                        const Eigen::MatrixBase<DerivedY>& y) {
  return (x.transpose() * s.omega.template cast<typename DerivedX::Scalar>() * y).eval();
}

struct Symplectomorphism {
  SymplecticSpace space;
  Mat m;
};

inline bool is_symplectic(const SymplecticSpace& s, const Mat& g, double tol = kDefaultTol) {
  if (g.rows() != 2 * s.n || g.cols() != 2 * s.n) return false;
  double scale = std::max(1.0, g.squaredNorm());
  return (g.transpose() * s.omega * g - s.omega).norm() <= tol * scale;
}

inline Symplectomorphism make_symplectomorphism(const SymplecticSpace& s, const Mat& g,
                                                double tol = kDefaultTol) {
  check_domain(is_symplectic(s, g, tol), "make_symplectomorphism: g^T.Omega.g != Omega");
  return Symplectomorphism{s, g};
}

inline Symplectomorphism sp_direct_sum(const Symplectomorphism& a, const Symplectomorphism& b) {
  SymplecticSpace s = product_space(a.space, b.space);
  return Symplectomorphism{s, interleave_direct_sum<double>(a.m, b.m)};
}

// A positive polarization E of S (x) C: Lagrangian, with (1/i).omega(x, conj x) > 0
// on E \ {0}.  Stored in the canonical Siegel gauge: frame [Z; I] with Z symmetric
// and Im Z positive definite.  All scalar invariants that depend on a frame choice
// (transfer determinants, half-form scalars) are taken in this gauge.
struct PositivePolarization {
  SymplecticSpace space;
  CMat siegel;  // n x n
  CMat frame;   // 2n x n, equals [siegel; I]
};

inline PositivePolarization polarization_from_siegel(const SymplecticSpace& s, const CMat& z,
                                                     double tol = kDefaultTol) {
  check_domain(z.rows() == s.n && z.cols() == s.n,
               "polarization_from_siegel: Z must be n x n");
  double scale = std::max(1.0, z.norm());
  check_domain((z - z.transpose()).norm() <= tol * scale,
               "polarization_from_siegel: Z not symmetric");
  CMat im = (z - z.adjoint()) / (2.0 * kI);  // Hermitian part of Im Z
  Eigen::SelfAdjointEigenSolver<CMat> es(im);
  check_internal(es.info() == Eigen::Success, "polarization_from_siegel: eigensolver failed");
  check_domain(es.eigenvalues().minCoeff() > 0.0,
               "polarization_from_siegel: Im Z not positive definite (not a positive polarization)");
  PositivePolarization p;
  p.space = s;
  p.siegel = 0.5 * (z + z.transpose());  // kill symmetric round-off
  p.frame = CMat(2 * s.n, s.n);
  p.frame.topRows(s.n) = p.siegel;
  p.frame.bottomRows(s.n) = CMat::Identity(s.n, s.n);
  return p;
}

inline CMat siegel_from_frame(const SymplecticSpace& s, const CMat& f) {
  check_domain(f.rows() == 2 * s.n && f.cols() == s.n, "siegel_from_frame: frame must be 2n x n");
  // Z = F_q . F_p^{-1}, computed as the solution of F_p^T Z^T = F_q^T.
  Eigen::FullPivLU<CMat> lu(f.bottomRows(s.n).transpose());
  check_domain(lu.isInvertible(),
               "siegel_from_frame: momentum block singular (not a positive polarization)");
  return lu.solve(f.topRows(s.n).transpose()).transpose();
}

// Reads the Siegel point back off the stored frame rather than trusting the
// cached field, so it doubles as a round-trip check.
inline CMat siegel_from_polarization(const PositivePolarization& p) {
  return siegel_from_frame(p.space, p.frame);
}

inline PositivePolarization polarization_from_frame(const SymplecticSpace& s, const CMat& f,
                                                    double tol = kDefaultTol) {
  check_domain(f.rows() == 2 * s.n && f.cols() == s.n,
               "polarization_from_frame: frame must be 2n x n");
  double scale = std::max(1.0, f.squaredNorm());
  CMat lagr = f.transpose() * s.omega.cast<Complex>() * f;
  check_domain(lagr.norm() <= tol * scale, "polarization_from_frame: frame not Lagrangian");
  CMat gram = (f.transpose() * s.omega.cast<Complex>() * f.conjugate()) / kI;
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (gram + gram.adjoint()));
  check_domain(es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0,
               "polarization_from_frame: polarization not positive");
  return polarization_from_siegel(s, siegel_from_frame(s, f), tol);
}

inline PositivePolarization standard_polarization(const SymplecticSpace& s) {
  return polarization_from_siegel(s, kI * CMat::Identity(s.n, s.n));
}

inline PositivePolarization product_polarization(const PositivePolarization& a,
                                                 const PositivePolarization& b) {
  SymplecticSpace s = product_space(a.space, b.space);
  CMat z = CMat::Zero(s.n, s.n);
  z.topLeftCorner(a.space.n, a.space.n) = a.siegel;
  z.bottomRightCorner(b.space.n, b.space.n) = b.siegel;
  return polarization_from_siegel(s, z);
}

inline bool same_polarization(const PositivePolarization& a, const PositivePolarization& b,
                              double tol = kDefaultTol) {
  return a.space.n == b.space.n && approx_equal(a.siegel, b.siegel, tol);
}

// Hermitian Gram matrix H_ab = (1/i).omega(F_a, conj F_b); equals 2 Im Z in the
// canonical gauge.
inline CMat gram_matrix(const PositivePolarization& p) {
  return (p.frame.transpose() * p.space.omega.cast<Complex>() * p.frame.conjugate()) / kI;
}

// The compatible complex structure j with E = ker(j - i).  Real, j^2 = -I, and
// G = Omega.j is symmetric positive definite.
inline Mat complex_structure(const PositivePolarization& p) {
  const Eigen::Index n = p.space.n;
  CMat basis(2 * n, 2 * n);
  basis.leftCols(n) = p.frame;
  basis.rightCols(n) = p.frame.conjugate();
  CMat scaled(2 * n, 2 * n);
  scaled.leftCols(n) = kI * p.frame;
  scaled.rightCols(n) = -kI * p.frame.conjugate();
  CMat jc = basis.transpose().fullPivLu().solve(scaled.transpose()).transpose();
  check_internal(jc.imag().norm() <= 1e-10 * std::max(1.0, jc.norm()),
                 "complex_structure: result not real");
  Mat j = jc.real();
  check_internal(approx_equal(j * j, Mat(-Mat::Identity(2 * n, 2 * n)), 1e-9),
                 "complex_structure: j^2 != -I");
  return j;
}

// Riemannian metric G(x,y) = omega(x, j.y).
inline Mat polarization_metric(const PositivePolarization& p) {
  return p.space.omega * complex_structure(p);
}

// Projector onto E along conj(E): pi = (I - i.j)/2.
inline CMat projector(const PositivePolarization& p) {
  const Eigen::Index d = 2 * p.space.n;
  return 0.5 * (CMat::Identity(d, d) - kI * complex_structure(p).cast<Complex>());
}

inline PositivePolarization pushforward(const Symplectomorphism& g,
                                        const PositivePolarization& p) {
  check_domain(g.space.n == p.space.n, "pushforward: dimension mismatch");
  return polarization_from_frame(p.space, g.m.cast<Complex>() * p.frame);
}

}  // namespace mpwb
