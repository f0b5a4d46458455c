#pragma once

#include "mpwb/symplectic.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace mpwb {

// Decomposition data for F_b = F_a.M + conj(F_b).N, i.e. the matrix of the
// projection E_b -> E_a along conj(E_b) written in the given frames.
// d = det M is the scalar of the induced map on top dual forms.
struct TransferData {
  CMat m;
  CMat n;
  Complex d;
};

inline TransferData frame_transfer(const SymplecticSpace& s, const CMat& fa, const CMat& fb) {
  const Eigen::Index n = s.n;
  CMat lhs(2 * n, 2 * n);
  lhs.leftCols(n) = fa;
  lhs.rightCols(n) = fb.conjugate();
  Eigen::FullPivLU<CMat> lu(lhs);
  check_domain(lu.isInvertible(),
               "frame_transfer: E_a + conj(E_b) does not span (polarizations not positive?)");
  CMat x = lu.solve(fb);
  TransferData t;
  t.m = x.topRows(n);
  t.n = x.bottomRows(n);
  t.d = t.m.determinant();
  check_internal((fa * t.m + fb.conjugate() * t.n - fb).norm() <=
                     1e-9 * std::max(1.0, fb.norm()),
                 "frame_transfer: solve residual too large");
  return t;
}

inline TransferData transfer_matrix(const PositivePolarization& pa,
                                    const PositivePolarization& pb) {
  check_domain(pa.space.n == pb.space.n, "transfer_matrix: dimension mismatch");
  return frame_transfer(pa.space, pa.frame, pb.frame);
}

inline Complex transfer_det(const PositivePolarization& pa, const PositivePolarization& pb) {
  return transfer_matrix(pa, pb).d;
}

// zeta(a,b,c) = d(a,c) / (d(a,b).d(b,c)): the scalar by which the two-step
// transfer a -> b -> c differs from the direct one.  Frame-gauge invariant.
inline Complex zeta(const PositivePolarization& pa, const PositivePolarization& pb,
                    const PositivePolarization& pc) {
  Complex dab = transfer_det(pa, pb);
  Complex dbc = transfer_det(pb, pc);
  Complex dac = transfer_det(pa, pc);
  check_internal(std::abs(dab) > 0.0 && std::abs(dbc) > 0.0, "zeta: vanishing transfer");
  return dac / (dab * dbc);
}

namespace detail {

// Continuous branch of sqrt(f) along [0,1] given f(0) with known sqrt s0.
// Subdivides until every consecutive ratio lies in the right half-plane, then
// multiplies principal square roots.  `evals` caps total function evaluations.
template <typename F>
Complex track_sqrt(const F& f, Complex s0, Complex f0, int initial_steps, long max_evals) {
  long evals = 0;
  Complex acc = s0;
  // manual stack of segments to refine: (t0, f(t0), t1, f(t1))
  struct Seg {
    double t0;
    Complex f0;
    double t1;
    Complex f1;
  };
  std::vector<Seg> pending;
  double step = 1.0 / initial_steps;
  Complex prev = f0;
  for (int k = 1; k <= initial_steps; ++k) {
    double t = (k == initial_steps) ? 1.0 : k * step;
    Complex cur = f(t);
    ++evals;
    pending.push_back({t - step, (k == 1) ? f0 : prev, t, cur});
    prev = cur;
  }
  // process in order; refine a segment in place when its ratio leaves the
  // right half-plane
  for (std::size_t idx = 0; idx < pending.size(); ++idx) {
    Seg seg = pending[idx];
    Complex ratio = seg.f1 / seg.f0;
    if (ratio.real() > 0.0) {
      acc *= std::sqrt(ratio);
      continue;
    }
    check_domain(evals < max_evals,
                 "branch tracking: subdivision limit exceeded (path too wild)");
    double tm = 0.5 * (seg.t0 + seg.t1);
    Complex fm = f(tm);
    ++evals;
    // replace current segment by its halves, preserving order
    pending[idx] = {seg.t0, seg.f0, tm, fm};
    pending.insert(pending.begin() + idx + 1, {tm, fm, seg.t1, seg.f1});
    --idx;
  }
  return acc;
}

inline bool siegel_close(const CMat& a, const CMat& b) {
  return (a - b).norm() <= 64.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::max(a.norm(), b.norm()));
}

}  // namespace detail

// Square root of zeta with the continuous normalization: value 1 when the
// three polarizations coincide, extended along the straight-line contraction
// t -> (Z_a, (1-t)Z_a + t.Z_b, (1-t)Z_a + t.Z_c) inside the (convex) Siegel
// domain.  The triple space is contractible, so this branch is unique.
inline Complex zeta_sqrt(const PositivePolarization& pa, const PositivePolarization& pb,
                         const PositivePolarization& pc, int path_steps = 32,
                         long max_evals = (1L << 20)) {
  if (detail::siegel_close(pb.siegel, pa.siegel) && detail::siegel_close(pc.siegel, pa.siegel))
    return Complex{1.0, 0.0};
  const SymplecticSpace& s = pa.space;
  auto zeta_t = [&](double t) -> Complex {
    CMat zb = (1.0 - t) * pa.siegel + t * pb.siegel;
    CMat zc = (1.0 - t) * pa.siegel + t * pc.siegel;
    return zeta(pa, polarization_from_siegel(s, zb), polarization_from_siegel(s, zc));
  };
  Complex result =
      detail::track_sqrt(zeta_t, Complex{1.0, 0.0}, Complex{1.0, 0.0}, path_steps, max_evals);
  Complex target = zeta(pa, pb, pc);
  check_internal(approx_equal(result * result, target, 1e-7),
                 "zeta_sqrt: tracked branch does not square to zeta");
  return result;
}

// Lift of the canonical transfer map to half-form lines: psi^2 = d(source, target)
// in the canonical gauges.
struct HalfFormMorphism {
  PositivePolarization source;
  PositivePolarization target;
  Complex psi;
};

inline HalfFormMorphism make_half_form_morphism(const PositivePolarization& pa,
                                                const PositivePolarization& pb, Complex psi,
                                                double tol = kDefaultTol) {
  Complex d = transfer_det(pa, pb);
  check_domain(approx_equal(psi * psi, d, tol),
               "make_half_form_morphism: psi^2 != transfer determinant");
  return HalfFormMorphism{pa, pb, psi};
}

inline HalfFormMorphism hf_identity(const PositivePolarization& p) {
  return HalfFormMorphism{p, p, Complex{1.0, 0.0}};
}

// Both square roots of d(a,b); first one is the distinguished branch, tracked
// continuously along the Siegel segment from Z_a (where d = 1, sqrt = +1) to Z_b.
inline std::pair<HalfFormMorphism, HalfFormMorphism> hf_lift(const PositivePolarization& pa,
                                                             const PositivePolarization& pb,
                                                             int path_steps = 32) {
  Complex psi;
  if (detail::siegel_close(pb.siegel, pa.siegel)) {
    psi = Complex{1.0, 0.0};
  } else {
    auto d_t = [&](double t) -> Complex {
      CMat z = (1.0 - t) * pa.siegel + t * pb.siegel;
      return transfer_det(pa, polarization_from_siegel(pa.space, z));
    };
    psi = detail::track_sqrt(d_t, Complex{1.0, 0.0}, Complex{1.0, 0.0}, path_steps, 1L << 20);
  }
  return {HalfFormMorphism{pa, pb, psi}, HalfFormMorphism{pa, pb, -psi}};
}

// Composition twisted by the cocycle: psi = zeta^{1/2}(a,b,c).psi2.psi1, which
// again squares to d(a,c).
inline HalfFormMorphism hf_compose(const HalfFormMorphism& m2, const HalfFormMorphism& m1,
                                   double tol = kDefaultTol) {
  check_domain(same_polarization(m1.target, m2.source, tol),
               "hf_compose: middle polarizations do not match");
  Complex c = zeta_sqrt(m1.source, m1.target, m2.target);
  return HalfFormMorphism{m1.source, m2.target, c * m2.psi * m1.psi};
}

// Half-form lines carry the Hermitian norm induced by the polarization Gram;
// in the canonical gauge the adjoint scalar picks up (h_a/h_b)^{1/2} with
// h = det Gram.
inline HalfFormMorphism hf_adjoint(const HalfFormMorphism& m) {
  double ha = gram_matrix(m.source).determinant().real();
  double hb = gram_matrix(m.target).determinant().real();
  check_internal(ha > 0.0 && hb > 0.0, "hf_adjoint: Gram determinant not positive");
  return HalfFormMorphism{m.target, m.source, std::conj(m.psi) * std::sqrt(ha / hb)};
}

// Morphism (S, E_a) -> (S, E_b) over a symplectomorphism g, with half-form
// scalar psi; psi^2 equals the transfer determinant of (gE_a in the transported
// gauge g.F_a) against E_b.
struct DMorphism {
  Symplectomorphism g;
  PositivePolarization source;
  PositivePolarization target;
  Complex psi;
};

inline Complex dmor_transfer_det(const Symplectomorphism& g, const PositivePolarization& pa,
                                 const PositivePolarization& pb) {
  return frame_transfer(pa.space, g.m.cast<Complex>() * pa.frame, pb.frame).d;
}

inline DMorphism make_dmorphism(const Symplectomorphism& g, const PositivePolarization& pa,
                                const PositivePolarization& pb, Complex psi,
                                double tol = kDefaultTol) {
  check_domain(g.space.n == pa.space.n && pa.space.n == pb.space.n,
               "make_dmorphism: dimension mismatch");
  Complex d = dmor_transfer_det(g, pa, pb);
  check_domain(approx_equal(psi * psi, d, tol),
               "make_dmorphism: psi^2 != transported transfer determinant");
  return DMorphism{g, pa, pb, psi};
}

inline DMorphism dmor_identity(const PositivePolarization& p) {
  Mat id = Mat::Identity(2 * p.space.n, 2 * p.space.n);
  return DMorphism{Symplectomorphism{p.space, id}, p, p, Complex{1.0, 0.0}};
}

inline DMorphism dmor_compose(const DMorphism& m2, const DMorphism& m1,
                              double tol = kDefaultTol) {
  check_domain(m1.g.space.n == m2.g.space.n, "dmor_compose: dimension mismatch");
  check_domain(same_polarization(m1.target, m2.source, tol),
               "dmor_compose: middle polarizations do not match");
  Symplectomorphism g{m1.g.space, m2.g.m * m1.g.m};
  PositivePolarization p_full = pushforward(g, m1.source);
  PositivePolarization p_half = pushforward(m2.g, m1.target);
  Complex c = zeta_sqrt(p_full, p_half, m2.target);
  return DMorphism{g, m1.source, m2.target, c * m2.psi * m1.psi};
}

inline DMorphism dmor_adjoint(const DMorphism& m) {
  double ha = gram_matrix(m.source).determinant().real();
  double hb = gram_matrix(m.target).determinant().real();
  check_internal(ha > 0.0 && hb > 0.0, "dmor_adjoint: Gram determinant not positive");
  Eigen::FullPivLU<Mat> lu(m.g.m);
  check_internal(lu.isInvertible(), "dmor_adjoint: symplectomorphism not invertible");
  Symplectomorphism ginv{m.g.space, lu.inverse()};
  return DMorphism{ginv, m.target, m.source, std::conj(m.psi) * std::sqrt(ha / hb)};
}

}  // namespace mpwb
