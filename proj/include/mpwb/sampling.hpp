#pragma once

// Deterministic random generators for symplectic data.  Everything is driven
// by a caller-owned mt19937_64, so a fixed seed reproduces the exact same
// models — the invariant battery and the test suites rely on that.

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "mpwb/core.hpp"
#include "mpwb/metaplectic.hpp"
#include "mpwb/symplectic.hpp"

namespace mpwb {

inline Mat random_symmetric(std::mt19937_64& rng, Eigen::Index d, double scale) {
  std::normal_distribution<double> gauss(0.0, scale);
  Mat s(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    s(i, i) = gauss(rng);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      s(i, j) = gauss(rng);
      s(j, i) = s(i, j);
    }
  }
  return s;
}

// Product of two one-parameter flows exp(Omega S): lands scattered across the
// group instead of hugging a single subgroup.  Symplecticity is inherited
// from the Hamiltonian form of the generators (up to matrix-exp round-off).
inline Symplectomorphism random_symplectomorphism(std::mt19937_64& rng, const SymplecticSpace& s,
                                                  double scale = 0.35) {
  const Eigen::Index d = 2 * s.n;
  Mat a = s.omega * random_symmetric(rng, d, scale);
  Mat b = s.omega * random_symmetric(rng, d, scale);
  Mat g = a.exp() * b.exp();
  return make_symplectomorphism(s, g);
}

// Siegel point Z = X + iY with a comfortable positivity margin.
inline CMat random_siegel(std::mt19937_64& rng, Eigen::Index n, double spread = 0.6) {
  std::normal_distribution<double> gauss(0.0, spread);
  Mat x = random_symmetric(rng, n, spread);
  Mat l(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) l(i, j) = gauss(rng);
  }
  Mat y = l * l.transpose() + 0.3 * Mat::Identity(n, n);
  return x.cast<Complex>() + kI * y.cast<Complex>();
}

inline PositivePolarization random_polarization(std::mt19937_64& rng, const SymplecticSpace& s,
                                                double spread = 0.6) {
  return polarization_from_siegel(s, random_siegel(rng, s.n, spread));
}

// Haar-ish unitary via QR of a complex Gaussian matrix with the usual phase
// fix on the R diagonal.
inline CMat random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<CMat> qr(m);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex d = r(i, i);
    q.col(i) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0, 0.0);
  }
  return q;
}

// Transversal sample: resamples until 1 is comfortably outside the spectrum,
// so indices and trace denominators are well defined.
inline Symplectomorphism random_index_defined(std::mt19937_64& rng, const SymplecticSpace& s,
                                              double scale = 0.35) {
  const Eigen::Index d = 2 * s.n;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Symplectomorphism g = random_symplectomorphism(rng, s, scale);
    if (std::abs((Mat::Identity(d, d) - g.m).determinant()) > 1e-3) return g;
  }
  throw internal_error("random_index_defined: sampler kept hitting the singular wall");
}

inline MetaplecticElement random_mp_element(std::mt19937_64& rng, const SymplecticSpace& s,
                                            const PositivePolarization& ref, double scale = 0.35) {
  Symplectomorphism g = random_index_defined(rng, s, scale);
  auto lifts = mp_lift(g, ref);
  return (rng() & 1u) ? lifts.second : lifts.first;
}

inline Mat planar_rotation(double theta) {
  Mat r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

// Conjugated block-rotation: eigenvalues on the unit circle away from 1, so
// det(I - g) > 0 (n = 1) and truncated operator diagonals decay.  The
// conjugation scale controls how far from a pure rotation the model sits.
inline Symplectomorphism random_elliptic(std::mt19937_64& rng, const SymplecticSpace& s,
                                         double conjugation_scale = 0.25,
                                         double angle_lo = 0.4,
                                         double angle_hi = 2.0 * kPi - 0.4) {
  std::uniform_real_distribution<double> angle(angle_lo, angle_hi);
  Symplectomorphism block = [&] {
    if (s.n == 1) return make_symplectomorphism(s, planar_rotation(angle(rng)));
    Symplectomorphism acc =
        make_symplectomorphism(standard_space(1), planar_rotation(angle(rng)));
    for (Eigen::Index i = 1; i < s.n; ++i) {
      acc = sp_direct_sum(
          acc, make_symplectomorphism(standard_space(1), planar_rotation(angle(rng))));
    }
    return acc;
  }();
  Symplectomorphism c = random_symplectomorphism(rng, s, conjugation_scale);
  Mat g = c.m * block.m * c.m.inverse();
  return make_symplectomorphism(s, g);
}

// Conjugated squeeze for n = 1: real eigenvalues lambda, 1/lambda with
// lambda > 1, so det(I - g) < 0 and the index is even.
inline Symplectomorphism random_hyperbolic(std::mt19937_64& rng, const SymplecticSpace& s,
                                           double conjugation_scale = 0.35) {
  check_input(s.n == 1, "random_hyperbolic: n = 1 only");
  std::uniform_real_distribution<double> stretch(1.5, 3.0);
  Mat d = Mat::Zero(2, 2);
  double lambda = stretch(rng);
  d(0, 0) = lambda;
  d(1, 1) = 1.0 / lambda;
  Symplectomorphism c = random_symplectomorphism(rng, s, conjugation_scale);
  Mat g = c.m * d * c.m.inverse();
  return make_symplectomorphism(s, g);
}

// Index-stratified n=1 sampler: odd indices come from the elliptic family,
// even ones from the hyperbolic family, branches split by one rng bit.  All
// four index classes show up with comparable frequency.
inline MetaplecticElement random_mp_element_stratified(std::mt19937_64& rng,
                                                       const SymplecticSpace& s,
                                                       const PositivePolarization& ref) {
  check_input(s.n == 1, "random_mp_element_stratified: n = 1 only");
  Symplectomorphism g = (rng() & 1u) ? random_elliptic(rng, s) : random_hyperbolic(rng, s);
  auto lifts = mp_lift(g, ref);
  return (rng() & 1u) ? lifts.second : lifts.first;
}

}  // namespace mpwb
