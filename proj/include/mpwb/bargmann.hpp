#pragma once

// Bargmann models over a symplectic vector space: for each positive
// polarization, a concrete Hilbert space of E-holomorphic Gaussian sections of
// the (trivialized) prequantum line, and for each half-form morphism the
// integral operator between two such spaces.  Everything reduces to exact
// Gaussian moments — no quadrature anywhere.
//
// The operator attached to a morphism (g, psi) acts by
//
//     (U f)(x) = (2 pi)^{-n} * psi * integral exp(Phi(x,y)) f(y) dy
//
// where Phi is the unique quadratic phase that vanishes on the graph of g and
// makes exp(Phi) holomorphic as a section in x and an anti-holomorphic one in
// y.  Matrix entries in the monomial bases are then moments of a single
// Gaussian weight on the doubled space, which GaussianForms evaluates in
// closed form.

#include <cmath>
#include <string>
#include <vector>

#include "mpwb/core.hpp"
#include "mpwb/gaussian.hpp"
#include "mpwb/halfform.hpp"
#include "mpwb/metaplectic.hpp"
#include "mpwb/symplectic.hpp"

namespace mpwb {

// One Gaussian section p(Bx) * exp(x^T C x / 2).  The exponent C is pinned to
// the vacuum gauge -Omega j / 2 (see vacuum_section); B maps a point to its
// holomorphic coordinates, so the polynomial part lives in n variables.
struct GaussianSection {
  CMat c;           // 2n x 2n symmetric exponent
  Polynomial poly;  // in the n holomorphic coordinates w = B x
  CMat b;           // n x 2n coordinate map
};

// Vacuum of the model attached to P.  The polarized-section condition only
// determines the exponent on conj(E); taking C = -Omega j / 2 extends it
// symmetrically, and since Omega j is the compatible metric the real part is
// automatically negative definite.  For the standard polarization (n = 1)
// this is the familiar exp(-(q^2 + p^2)/4).
inline GaussianSection vacuum_section(const PositivePolarization& p) {
  const int two_n = 2 * p.space.n;
  Mat j = complex_structure(p);
  CMat c = (-0.5 * (p.space.omega * j)).cast<Complex>();

  CMat ff(two_n, two_n);
  ff << p.frame, p.frame.conjugate();
  CMat b = ff.fullPivLu().inverse().topRows(p.space.n);

  // re-verify the defining identities instead of trusting the construction
  CMat fbar = p.frame.conjugate();
  CMat holo_target = (0.5 * kI) * (p.space.omega.cast<Complex>() * fbar);
  check_internal(approx_equal(CMat(c * fbar), holo_target, 1e-10),
                 "vacuum_section: covariant holomorphy violated");
  check_internal(approx_equal(CMat(b * p.frame), CMat(CMat::Identity(p.space.n, p.space.n)), 1e-10),
                 "vacuum_section: B F != I");
  check_internal(CMat(b * fbar).norm() <= 1e-10 * std::max(1.0, b.norm() * fbar.norm()),
                 "vacuum_section: B conj(F) != 0");
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(c.real()));
  check_internal(es.eigenvalues().maxCoeff() < 0.0,
                 "vacuum_section: Re C is not negative definite");

  return GaussianSection{c, constant_poly(Complex(1.0, 0.0), p.space.n), b};
}

namespace detail {

// Gram of the monomial basis w^alpha * vacuum, |alpha| <= max_degree, in the
// graded order of graded_multi_indices.  Entries are plain Lebesgue integrals
// conj(s_alpha) s_beta; no normalization constant (it cancels from everything
// we expose).
inline CMat monomial_gram(const GaussianSection& vac, int n, int max_degree) {
  const int two_n = 2 * n;
  CMat weight = vac.c.conjugate() + vac.c;
  CMat forms(two_n, two_n);
  forms.topRows(n) = vac.b.conjugate();
  forms.bottomRows(n) = vac.b;
  GaussianForms gf(weight, CVec::Zero(two_n), forms);

  auto idx = graded_multi_indices(n, max_degree);
  const auto count = static_cast<Eigen::Index>(idx.size());
  CMat gram(count, count);
  std::vector<int> powers(static_cast<std::size_t>(two_n));
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < count; ++j) {
      for (int k = 0; k < n; ++k) {
        powers[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        powers[static_cast<std::size_t>(n + k)] = idx[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      }
      gram(i, j) = gf.integral(powers);
    }
  }
  return 0.5 * (gram + CMat(gram.adjoint()));
}

// X with X^* G X = I.  A graded monomial Gram spans a huge dynamic range
// (degree-k norms grow like k!), so invert the square root of the
// diagonally balanced matrix rather than of G itself.  The result differs
// from G^{-1/2} by a degree-preserving unitary, which is exactly the gauge
// freedom the operator matrices are allowed.
inline CMat gram_whitener(const CMat& gram, const char* who) {
  Vec diag = gram.diagonal().real();
  check_internal(diag.minCoeff() > 0.0, std::string(who) + ": Gram diagonal not positive");
  Vec scale = diag.cwiseSqrt().cwiseInverse();
  CMat balanced = scale.asDiagonal() * gram * scale.asDiagonal();
  balanced = 0.5 * (balanced + CMat(balanced.adjoint()));
  CMat root = hermitian_inverse_sqrt(balanced, who);
  return scale.asDiagonal() * root;
}

}  // namespace detail

// Monomial basis with its Gram matrix, graded order.
struct BargmannBasis {
  std::vector<GaussianSection> sections;
  std::vector<std::vector<int>> degrees;  // multi-index of each basis element
  CMat gram;
};

inline BargmannBasis basis(const PositivePolarization& p, int max_degree) {
  check_input(max_degree >= 0, "basis: negative truncation degree");
  GaussianSection vac = vacuum_section(p);
  BargmannBasis out;
  out.degrees = graded_multi_indices(p.space.n, max_degree);
  out.sections.reserve(out.degrees.size());
  for (const auto& alpha : out.degrees) {
    out.sections.push_back(GaussianSection{vac.c, {PolyTerm{Complex(1.0, 0.0), alpha}}, vac.b});
  }
  out.gram = detail::monomial_gram(vac, p.space.n, max_degree);
  // positive definiteness, via the balanced matrix so the check is meaningful
  detail::gram_whitener(out.gram, "basis");
  return out;
}

// Condition number of the Gram (ratio of extreme eigenvalues); finite for any
// valid polarization and truncation, reported by the CLI for diagnostics.
inline double gram_condition(const CMat& gram) {
  Eigen::SelfAdjointEigenSolver<CMat> es(gram);
  check_domain(es.eigenvalues().minCoeff() > 0.0, "gram_condition: Gram not positive definite");
  return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

// The quadratic phase Phi on S_b (+) S_a attached to a symplectomorphism and a
// pair of polarizations, as the symmetric matrix Q of 2 Phi on the doubled
// space, u = (x_target; y_source).
struct PhaseForm {
  CMat q;                       // 4n x 4n complex symmetric
  double graph_residual;        // ||Gamma^T Q Gamma|| after the solve
  double holomorphy_residual;   // ||Q W - R|| after the solve
};

// Build Q directly from its defining linear conditions:
//
//   * holomorphy:  Q W = R, where W stacks conj(F_b) on the target slot and
//     F_a on the source slot, and R carries the connection term (i/2) Omega
//     with the sign flipped on the source (the kernel pairs like a section in
//     x against the conjugate of a section in y);
//   * graph vanishing:  Gamma^T Q Gamma = 0 for Gamma = [g; I].
//
// Together the columns of W and Gamma span the doubled space (a positivity
// argument: E_a and g^{-1} conj(E_b) intersect trivially), so the two
// conditions pin V^T Q V for V = [W | Gamma] and hence Q itself.  If V ever
// fails to be invertible the conventions are broken, not the input.
inline PhaseForm phase_form(const Symplectomorphism& g, const PositivePolarization& pa,
                            const PositivePolarization& pb) {
  const int n = pa.space.n;
  check_input(pb.space.n == n && g.space.n == n, "phase_form: mismatched spaces");
  const int two_n = 2 * n;
  const int four_n = 4 * n;
  CMat om = pa.space.omega.cast<Complex>();
  CMat fb_bar = pb.frame.conjugate();
  const CMat& fa = pa.frame;

  CMat w = CMat::Zero(four_n, two_n);
  w.block(0, 0, two_n, n) = fb_bar;
  w.block(two_n, n, two_n, n) = fa;
  CMat r = CMat::Zero(four_n, two_n);
  r.block(0, 0, two_n, n) = (0.5 * kI) * (om * fb_bar);
  r.block(two_n, n, two_n, n) = (-0.5 * kI) * (om * fa);
  CMat gamma(four_n, two_n);
  gamma.topRows(two_n) = g.m.cast<Complex>();
  gamma.bottomRows(two_n) = CMat::Identity(two_n, two_n);

  CMat v(four_n, four_n);
  v << w, gamma;
  Eigen::FullPivLU<CMat> lu(v);
  check_internal(lu.isInvertible(),
                 "phase_form: constraint system rank-deficient (convention bug)");
  CMat v_inv = lu.inverse();

  CMat wtr = w.transpose() * r;      // vanishes because the frames are Lagrangian
  CMat gtr = gamma.transpose() * r;
  CMat qhat(four_n, four_n);
  qhat << wtr, gtr.transpose(), gtr, CMat::Zero(two_n, two_n);
  CMat q = v_inv.transpose() * qhat * v_inv;
  q = 0.5 * (q + CMat(q.transpose()));

  double scale = std::max(1.0, r.norm());
  double holo = (q * w - r).norm() / scale;
  double graph = (gamma.transpose() * q * gamma).norm() / std::max(1.0, q.norm());
  check_internal(holo < 1e-8 && graph < 1e-8, "phase_form: solution residual too large");
  return PhaseForm{q, graph, holo};
}

// Matrix of the quantized morphism between the orthonormalized truncated
// bases of its source and target models.
struct OperatorMatrix {
  CMat entries;
  int truncation;
  int n;
  std::vector<std::vector<int>> basis_degrees;  // common graded layout
};

inline OperatorMatrix operator_matrix(const DMorphism& m, int truncation) {
  check_input(truncation >= 0, "operator_matrix: negative truncation");
  const int n = m.source.space.n;
  const int two_n = 2 * n;

  GaussianSection vac_a = vacuum_section(m.source);
  GaussianSection vac_b = vacuum_section(m.target);
  PhaseForm pf = phase_form(m.g, m.source, m.target);

  CMat weight = pf.q;
  weight.topLeftCorner(two_n, two_n) += vac_b.c.conjugate();
  weight.bottomRightCorner(two_n, two_n) += vac_a.c;
  // convergence is a theorem for positive polarizations, so a failure here is
  // a bug in the kernel construction, not bad input
  Eigen::SelfAdjointEigenSolver<Mat> conv(Mat(0.5 * (weight.real() + weight.real().transpose())));
  check_internal(conv.eigenvalues().maxCoeff() < 0.0,
                 "operator_matrix: kernel integral diverges (convention bug)");

  CMat forms = CMat::Zero(two_n, 2 * two_n);
  forms.topLeftCorner(n, two_n) = vac_b.b.conjugate();
  forms.bottomRightCorner(n, two_n) = vac_a.b;
  GaussianForms gf(weight, CVec::Zero(2 * two_n), forms);

  auto idx = graded_multi_indices(n, truncation);
  const auto count = static_cast<Eigen::Index>(idx.size());
  const Complex norm = std::pow(2.0 * kPi, -n) * m.psi;
  CMat raw(count, count);
  std::vector<int> powers(static_cast<std::size_t>(two_n));
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < count; ++j) {
      for (int k = 0; k < n; ++k) {
        powers[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        powers[static_cast<std::size_t>(n + k)] = idx[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      }
      raw(i, j) = norm * gf.integral(powers);
    }
  }

  CMat xb = detail::gram_whitener(detail::monomial_gram(vac_b, n, truncation), "operator_matrix");
  CMat xa = detail::gram_whitener(detail::monomial_gram(vac_a, n, truncation), "operator_matrix");
  return OperatorMatrix{CMat(xb.adjoint() * raw * xa), truncation, n, std::move(idx)};
}

// Trace of the integral kernel: (2 pi)^{-n} psi * integral exp(Phi(x,x)) dx.
// Finite exactly when 1 is not an eigenvalue of g, in which case it equals
// the closed-form index expression i^m / |det(I - g)|^{1/2}.
inline Complex kernel_trace(const DMorphism& m) {
  const int n = m.source.space.n;
  const int two_n = 2 * n;
  Mat gap = Mat::Identity(two_n, two_n) - m.g.m;
  check_domain(std::abs(gap.determinant()) > 1e-12,
               "kernel_trace: degenerate fixed point (det(I - g) = 0)");
  PhaseForm pf = phase_form(m.g, m.source, m.target);
  CMat diag_weight = pf.q.topLeftCorner(two_n, two_n) + pf.q.topRightCorner(two_n, two_n) +
                     pf.q.bottomLeftCorner(two_n, two_n) + pf.q.bottomRightCorner(two_n, two_n);
  return std::pow(2.0 * kPi, -n) * m.psi * gaussian_normalization(diag_weight);
}

namespace detail {

// Limit of a slowly converging sequence of partial sums via Wynn's epsilon
// algorithm.  Columns are deepened while the arithmetic stays sane and the
// flattest even column wins; for an exactly geometric tail the first column is
// already machine-exact and deeper ones are rejected by their scatter.
inline Complex epsilon_limit(const std::vector<Complex>& sums) {
  if (sums.size() < 8) return sums.empty() ? Complex(0.0, 0.0) : sums.back();
  auto scatter = [](const std::vector<Complex>& col) {
    double s = 0.0;
    std::size_t lo = col.size() >= 3 ? col.size() - 3 : 0;
    for (std::size_t i = lo; i + 1 < col.size(); ++i) s = std::max(s, std::abs(col[i + 1] - col[i]));
    return s;
  };
  std::vector<Complex> prev(sums.size() + 1, Complex(0.0, 0.0));  // eps_{-1} = 0
  std::vector<Complex> cur = sums;                                // eps_0
  Complex best = sums.back();
  double best_scatter = scatter(cur);
  while (cur.size() >= 4) {
    bool sane = true;
    std::vector<Complex> odd(cur.size() - 1);
    for (std::size_t i = 0; sane && i + 1 < cur.size(); ++i) {
      Complex d = cur[i + 1] - cur[i];
      sane = std::abs(d) > 1e-14 * (1.0 + std::abs(cur[i]));
      if (sane) odd[i] = prev[i + 1] + 1.0 / d;
    }
    if (!sane) break;  // column converged to roundoff; deeper entries are noise
    std::vector<Complex> even(odd.size() - 1);
    for (std::size_t i = 0; sane && i + 1 < odd.size(); ++i) {
      Complex d = odd[i + 1] - odd[i];
      sane = std::abs(d) > 1e-300;
      if (sane) even[i] = cur[i + 1] + 1.0 / d;
    }
    if (!sane) break;
    double s = scatter(even);
    if (s < best_scatter) {
      best_scatter = s;
      best = even.back();
    }
    prev = std::move(odd);
    cur = std::move(even);
  }
  return best;
}

}  // namespace detail

// Abel-regularized trace of a truncated operator matrix: the diagonal is
// grouped by total degree into the series sum_d (tr_d U) r^d, whose partial
// sums are then extrapolated with the epsilon algorithm.  A sharp cutoff alone
// would be useless here: for elliptic g the degree-d contributions oscillate
// with an O(1) envelope, so the truncated remainder at any workable window
// size dwarfs the Abel defect.  Extrapolation recovers the r < 1 limit from
// the window, leaving only the O(1-r) regularization bias.
inline Complex abel_trace(const OperatorMatrix& t, double r) {
  check_input(r > 0.0 && r < 1.0, "abel_trace: r must lie in (0,1)");
  std::vector<Complex> by_degree(static_cast<std::size_t>(t.truncation) + 1, Complex(0.0, 0.0));
  for (Eigen::Index k = 0; k < t.entries.rows(); ++k) {
    by_degree[static_cast<std::size_t>(
        multi_degree(t.basis_degrees[static_cast<std::size_t>(k)]))] += t.entries(k, k);
  }
  std::vector<Complex> partial;
  partial.reserve(by_degree.size());
  Complex acc(0.0, 0.0);
  double weight = 1.0;
  for (const Complex& tr_d : by_degree) {
    acc += tr_d * weight;
    weight *= r;
    partial.push_back(acc);
  }
  return detail::epsilon_limit(partial);
}

namespace detail {

// basis elements of degree <= cut form a leading block in the graded order
inline Eigen::Index degree_block_count(const std::vector<std::vector<int>>& degrees, int cut) {
  Eigen::Index count = 0;
  while (count < static_cast<Eigen::Index>(degrees.size()) &&
         multi_degree(degrees[static_cast<std::size_t>(count)]) <= cut) {
    ++count;
  }
  return count;
}

}  // namespace detail

// Deviation of U(m2 . m1) from U(m2) U(m1) on the low-degree block.  The
// composite operator is exact while the product loses whatever escapes the
// truncation, so the deviation measures truncation leakage and must die off
// as the truncation grows.
struct FunctorReport {
  double block_deviation;
  int block_degree;
  int truncation;
};

inline FunctorReport functor_check(const DMorphism& m1, const DMorphism& m2, int truncation,
                                   int block_degree = 6) {
  check_input(same_polarization(m1.target, m2.source), "functor_check: morphisms not composable");
  DMorphism comp = dmor_compose(m2, m1);
  OperatorMatrix t_comp = operator_matrix(comp, truncation);
  OperatorMatrix t2 = operator_matrix(m2, truncation);
  OperatorMatrix t1 = operator_matrix(m1, truncation);
  CMat prod = t2.entries * t1.entries;
  Eigen::Index cut = detail::degree_block_count(t_comp.basis_degrees, block_degree);
  double dev = (t_comp.entries.topLeftCorner(cut, cut) - prod.topLeftCorner(cut, cut)).norm();
  return FunctorReport{dev, block_degree, truncation};
}

// ||(U^* U - I)|| on the degree-<=cut block of a truncated operator matrix.
inline double unitarity_defect(const DMorphism& m, int truncation, int block_degree) {
  OperatorMatrix t = operator_matrix(m, truncation);
  Eigen::Index cut = detail::degree_block_count(t.basis_degrees, block_degree);
  CMat defect = CMat(t.entries.adjoint() * t.entries) -
                CMat::Identity(t.entries.rows(), t.entries.cols());
  return defect.topLeftCorner(cut, cut).norm();
}

// A metaplectic element (g, z) with reference polarization P acts on the
// Bargmann model of P as the morphism (g, P, P, z): the transfer determinant
// from the transported frame back to P is exactly 1/det(pi g|_E) = z^2.
inline DMorphism dmor_from_mp(const MetaplecticElement& e) {
  return make_dmorphism(e.g, e.ref, e.ref, e.z);
}

}  // namespace mpwb
