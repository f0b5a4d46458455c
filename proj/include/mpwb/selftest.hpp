#pragma once

// The invariant battery behind `mpwb selftest`: a quick deterministic sweep
// over every module's defining identities.  Not a substitute for the full
// test suite — this is the "is the installation sane" check, kept under a few
// seconds.

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>

#include "mpwb/bargmann.hpp"
#include "mpwb/gaussian.hpp"
#include "mpwb/halfform.hpp"
#include "mpwb/json_io.hpp"
#include "mpwb/metaplectic.hpp"
#include "mpwb/sampling.hpp"
#include "mpwb/symplectic.hpp"
#include "mpwb/trace_formulas.hpp"

namespace mpwb {

namespace selftest_detail {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

inline void expect_near(Complex got, Complex want, double tol, const std::string& what) {
  expect(std::abs(got - want) <= tol * std::max({1.0, std::abs(got), std::abs(want)}),
         what + " (got " + std::to_string(got.real()) + "+" + std::to_string(got.imag()) +
             "i, want " + std::to_string(want.real()) + "+" + std::to_string(want.imag()) + "i)");
}

class Runner {
 public:
  explicit Runner(std::ostream& out) : out_(out) {}

  void check(const std::string& name, const std::function<void()>& body) {
    try {
      body();
      out_ << "[ ok ] " << name << "\n";
      ++passed_;
    } catch (const std::exception& e) {
      out_ << "[FAIL] " << name << ": " << e.what() << "\n";
      ++failed_;
    }
  }

  int passed() const { return passed_; }
  int failed() const { return failed_; }

 private:
  std::ostream& out_;
  int passed_ = 0;
  int failed_ = 0;
};

}  // namespace selftest_detail

// Runs the battery, one line per check; returns the number of failures.
inline int run_selftest(std::ostream& out) {
  using selftest_detail::expect;
  using selftest_detail::expect_near;
  selftest_detail::Runner r(out);

  SymplecticSpace s1 = standard_space(1);
  SymplecticSpace s2 = standard_space(2);
  PositivePolarization std1 = standard_polarization(s1);
  PositivePolarization std2 = standard_polarization(s2);
  Symplectomorphism minus_id = make_symplectomorphism(s1, -Mat::Identity(2, 2));

  r.check("index anchors at -id", [&] {
    auto up = mp_index(make_mp_element(minus_id, kI, std1));
    auto down = mp_index(make_mp_element(minus_id, -kI, std1));
    expect(up.m == 1 && down.m == 3, "index of (-id, +-i) off");
    expect(up.residual < 1e-10 && down.residual < 1e-10, "anchor residual too large");
  });

  r.check("double cover relation", [&] {
    auto e = make_mp_element(minus_id, kI, std1);
    auto sq = mp_compose(e, e);
    expect(sq.g.m.isApprox(Mat::Identity(2, 2), 1e-12), "(-id)^2 != id");
    expect(sq.z == Complex(-1.0, 0.0), "square of (-id, i) is not exactly (id, -1)");
  });

  r.check("determinant branch equation", [&] {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 30; ++t) {
      const SymplecticSpace& s = (t % 2 == 0) ? s1 : s2;
      const PositivePolarization& p = (t % 2 == 0) ? std1 : std2;
      MetaplecticElement e = random_mp_element(rng, s, p);
      Mat a = a_matrix(e.g, p);
      const Eigen::Index d = 2 * s.n;
      CMat half(a.rows(), a.cols());
      half = 0.5 * CMat::Identity(d, d) + kI * a.cast<Complex>();
      Complex lhs = e.z * e.z * half.determinant();
      Complex rhs = std::pow(-1.0, s.n) / Complex((Mat::Identity(d, d) - e.g.m).determinant());
      expect_near(lhs, rhs, 1e-9, "z^2 det(I/2 + iA) mismatch");
    }
  });

  r.check("planar index characterization", [&] {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 100; ++t) {
      MetaplecticElement e = random_mp_element_stratified(rng, s1, std1);
      expect(mp_index_2d(e) == mp_index(e).m, "2d characterization disagrees with the index");
    }
  });

  r.check("cocycle identity", [&] {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 12; ++t) {
      const SymplecticSpace& s = (t % 3 == 0) ? s2 : s1;
      auto a = random_polarization(rng, s);
      auto b = random_polarization(rng, s);
      auto c = random_polarization(rng, s);
      auto d = random_polarization(rng, s);
      Complex lhs = zeta(a, b, c) * zeta(a, c, d);
      Complex rhs = zeta(a, b, d) * zeta(b, c, d);
      expect_near(lhs, rhs, 1e-8, "tetrahedron identity for zeta");
    }
  });

  r.check("square root of the cocycle", [&] {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 8; ++t) {
      const SymplecticSpace& s = (t % 2 == 0) ? s1 : s2;
      auto a = random_polarization(rng, s);
      auto b = random_polarization(rng, s);
      auto c = random_polarization(rng, s);
      expect(zeta_sqrt(a, a, a) == Complex(1.0, 0.0), "normalization at a coincident triple");
      Complex root = zeta_sqrt(a, b, c);
      expect_near(root * root, zeta(a, b, c), 1e-9, "square of the tracked root");
      Symplectomorphism g = random_symplectomorphism(rng, s);
      Complex moved = zeta_sqrt(pushforward(g, a), pushforward(g, b), pushforward(g, c));
      expect_near(moved, root, 1e-8, "equivariance of the tracked root");
    }
  });

  r.check("composition associativity", [&] {
    std::mt19937_64 rng(15);
    for (int t = 0; t < 12; ++t) {
      const SymplecticSpace& s = (t % 2 == 0) ? s1 : s2;
      const PositivePolarization& p = (t % 2 == 0) ? std1 : std2;
      auto e1 = random_mp_element(rng, s, p);
      auto e2 = random_mp_element(rng, s, p);
      auto e3 = random_mp_element(rng, s, p);
      auto left = mp_compose(mp_compose(e3, e2), e1);
      auto right = mp_compose(e3, mp_compose(e2, e1));
      expect(left.g.m.isApprox(right.g.m, 1e-10), "group part of associativity");
      expect_near(left.z, right.z, 1e-8, "scalar part of associativity");
    }
  });

  r.check("unitary embedding determinant lemma", [&] {
    std::mt19937_64 rng(16);
    for (int t = 0; t < 30; ++t) {
      const SymplecticSpace& s = (t % 2 == 0) ? s1 : s2;
      const PositivePolarization& p = (t % 2 == 0) ? std1 : std2;
      CMat h = random_unitary(rng, s.n);
      CMat gap = CMat::Identity(s.n, s.n) - h;
      if (std::abs(gap.determinant()) < 1e-3) continue;
      Mat g = iota_of_unitary(h, p);
      Mat a = a_matrix(make_symplectomorphism(s, g), p);
      Complex lhs = det_sqrt_half_plus_iA(a, p);
      CMat hin = h.inverse();
      Complex rhs = 1.0 / CMat(CMat::Identity(s.n, s.n) - hin).determinant();
      expect_near(lhs, rhs, 1e-9, "det^{1/2}(I/2 + iA(iota(h))) vs 1/det(I - h^{-1})");
    }
  });

  r.check("metalinear lift", [&] {
    // worked 1d cases: h = -1 with z = i lands on the (-I, i) branch (index 1),
    // h = 2 with z = sqrt(2) gives the squeeze diag(2, 1/2) with scalar 2/sqrt(5).
    {
      Mat h(1, 1);
      h(0, 0) = -1.0;
      MetaplecticElement e = metalinear_embed(h, kI, std1);
      expect_near(e.z, kI, 1e-12, "h = -1 scalar");
      expect(mp_index(e).m == 1, "h = -1 index");
      h(0, 0) = 2.0;
      e = metalinear_embed(h, Complex(std::sqrt(2.0), 0.0), std1);
      expect_near(e.g.m(0, 0), 2.0, 1e-12, "squeeze block");
      expect_near(e.z, Complex(2.0 / std::sqrt(5.0), 0.0), 1e-12, "h = 2 scalar");
      expect(mp_index(e).m == 0, "h = 2 index");
    }
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 0.8);
    int done = 0;
    while (done < 30) {
      const SymplecticSpace& s = (done % 2 == 0) ? s1 : s2;
      const PositivePolarization& p = (done % 2 == 0) ? std1 : std2;
      Mat h(s.n, s.n);
      for (Eigen::Index i = 0; i < s.n; ++i) {
        for (Eigen::Index j = 0; j < s.n; ++j) h(i, j) = gauss(rng);
      }
      double det = h.determinant();
      if (std::abs(det) < 0.1) continue;
      // principal square root of det h: real for det > 0, i |.|^{1/2} below the cut
      Complex z = (det > 0.0) ? Complex(std::sqrt(det), 0.0) : kI * std::sqrt(-det);
      MetaplecticElement e = metalinear_embed(h, z, p);
      Complex ratio = e.z / z;
      expect(std::abs(ratio.imag()) <= 1e-9 * std::abs(ratio) && ratio.real() > 0.0,
             "metalinear scalar not a positive multiple of z");
      // index rule: away from the fixed-point-degenerate locus, z carries i^m
      if (std::abs(Mat(Mat::Identity(s.n, s.n) - h).determinant()) > 1e-3) {
        int m = mp_index(e).m;
        expect_near(e.z, i_power(m) * std::abs(e.z), 1e-9, "z = i^m |z|");
      }
      ++done;
    }
  });

  r.check("gaussian moment engine", [&] {
    CMat k = -CMat::Identity(2, 2);
    CVec zero = CVec::Zero(2);
    expect_near(gaussian_normalization(k), Complex(2.0 * kPi, 0.0), 1e-12, "normalization");
    Polynomial sq = {PolyTerm{Complex(1.0, 0.0), {2, 0}}};
    expect_near(gaussian_moment_integral(k, zero, sq), Complex(2.0 * kPi, 0.0), 1e-12,
                "second moment");
    Polynomial odd = {PolyTerm{Complex(1.0, 0.0), {1, 2}}};
    expect(std::abs(gaussian_moment_integral(k, zero, odd)) < 1e-12, "odd moment should vanish");
  });

  r.check("vacuum sections", [&] {
    std::mt19937_64 rng(18);
    GaussianSection vac = vacuum_section(std1);
    expect(vac.c.isApprox(CMat(-0.5 * CMat::Identity(2, 2)), 1e-12),
           "standard vacuum exponent is not -I/2");
    for (int t = 0; t < 6; ++t) {
      vacuum_section(random_polarization(rng, (t % 2 == 0) ? s1 : s2));  // invariants re-verified inside
    }
  });

  r.check("phase form at the identity", [&] {
    PhaseForm pf = phase_form(make_symplectomorphism(s1, Mat::Identity(2, 2)), std1, std1);
    CMat want(4, 4);
    want << -0.5, 0.0, 0.5, Complex(0.0, -0.5),  //
        0.0, -0.5, Complex(0.0, 0.5), 0.5,       //
        0.5, Complex(0.0, 0.5), -0.5, 0.0,       //
        Complex(0.0, -0.5), 0.5, 0.0, -0.5;
    expect(pf.q.isApprox(want, 1e-9), "reproducing-kernel phase mismatch");
  });

  r.check("phase hessian link", [&] {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 8; ++t) {
      const SymplecticSpace& s = (t % 2 == 0) ? s1 : s2;
      const PositivePolarization& p = (t % 2 == 0) ? std1 : std2;
      Symplectomorphism g = random_index_defined(rng, s);
      const Eigen::Index d = 2 * s.n;
      PhaseForm pf = phase_form(g, p, p);
      CMat kd = pf.q.topLeftCorner(d, d) + pf.q.topRightCorner(d, d) +
                pf.q.bottomLeftCorner(d, d) + pf.q.bottomRightCorner(d, d);
      Mat a = a_matrix(g, p);
      CMat half = 0.5 * CMat::Identity(d, d) + kI * a.cast<Complex>();
      CMat target = half.inverse().transpose() * polarization_metric(p).cast<Complex>();
      target = 0.5 * (target + CMat(target.transpose()));
      expect(CMat(-kd).isApprox(target, 1e-8), "Hessian of the diagonal phase");
    }
  });

  r.check("kernel trace closed form", [&] {
    std::mt19937_64 rng(20);
    DMorphism neg = dmor_from_mp(make_mp_element(minus_id, kI, std1));
    expect_near(kernel_trace(neg), Complex(0.0, 0.5), 1e-10, "trace at (-id, i)");
    Mat d2 = Mat::Zero(2, 2);
    d2(0, 0) = 2.0;
    d2(1, 1) = 0.5;
    DMorphism squeeze = dmor_from_mp(
        make_mp_element(make_symplectomorphism(s1, d2), 2.0 / std::sqrt(5.0), std1));
    expect_near(kernel_trace(squeeze), Complex(std::sqrt(2.0), 0.0), 1e-10,
                "trace at the squeeze example");
    for (int t = 0; t < 10; ++t) {
      PositivePolarization ref = (t < 5) ? std1 : random_polarization(rng, s1);
      MetaplecticElement e = random_mp_element_stratified(rng, s1, std1);
      e = make_mp_element(e.g, mp_lift(e.g, ref).first.z, ref);
      IndexResult idx = mp_index(e);
      double det_ig = (Mat::Identity(2, 2) - e.g.m).determinant();
      Complex want = i_power(idx.m) / std::sqrt(std::abs(det_ig));
      expect_near(kernel_trace(dmor_from_mp(e)), want, 1e-8, "random kernel trace");
    }
  });

  r.check("reproducing identity operator", [&] {
    OperatorMatrix t = operator_matrix(dmor_identity(std1), 8);
    expect((t.entries - CMat::Identity(t.entries.rows(), t.entries.cols())).norm() < 1e-10,
           "identity morphism does not reproduce");
  });

  r.check("rotation diagonals", [&] {
    double phi = 0.7;
    Symplectomorphism rot = make_symplectomorphism(s1, planar_rotation(phi));
    DMorphism m = make_dmorphism(rot, std1, std1, std::polar(1.0, -phi / 2.0));
    OperatorMatrix t = operator_matrix(m, 10);
    for (Eigen::Index k = 0; k <= 10; ++k) {
      expect_near(t.entries(k, k), std::polar(1.0, -(k + 0.5) * phi), 1e-9,
                  "oscillator eigenvalue at degree " + std::to_string(k));
    }
    CMat off = t.entries;
    off.diagonal().setZero();
    expect(off.norm() < 1e-9, "rotation operator should be diagonal");
  });

  r.check("abel-summed trace", [&] {
    // rotation angles bounded away from the degenerate locus keep the
    // regularization bias, which scales like (1-r)/|det(I-g)|, below tolerance
    std::mt19937_64 rng(21);
    for (int t = 0; t < 5; ++t) {
      Symplectomorphism g = random_elliptic(rng, s1, 0.15, kPi / 2.0, 3.0 * kPi / 2.0);
      DMorphism m = dmor_from_mp(mp_lift(g, std1).first);
      Complex closed = kernel_trace(m);
      Complex abel = abel_trace(operator_matrix(m, 40), 0.999);
      expect(std::abs(closed - abel) < 1e-3, "Abel sum strays from the closed form");
    }
  });

  r.check("functoriality on rotations", [&] {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> angle(0.3, 2.8);
    for (int t = 0; t < 3; ++t) {
      double a = angle(rng), b = angle(rng);
      DMorphism m1 = make_dmorphism(make_symplectomorphism(s1, planar_rotation(a)), std1, std1,
                                    std::polar(1.0, -a / 2.0));
      DMorphism m2 = make_dmorphism(make_symplectomorphism(s1, planar_rotation(b)), std1, std1,
                                    std::polar(1.0, -b / 2.0));
      FunctorReport rep = functor_check(m1, m2, 16, 6);
      expect(rep.block_deviation < 1e-8, "composite operator deviates");
      expect(unitarity_defect(m1, 16, 6) < 1e-9, "rotation operator not unitary");
    }
  });

  r.check("sphere character", [&] {
    for (double theta : {kPi / 2.0, 1.0}) {
      for (int k = 1; k <= 12; ++k) {
        SphereModelResult res = sphere_model(theta, k);
        expect(res.difference < 1e-10, "two-pole formula misses the character");
        TraceQuery q{k, sphere_fixed_point_data(theta)};
        expect_near(lefschetz_number(q), Complex(res.exact, 0.0), 1e-10,
                    "Lefschetz sum misses the character");
      }
    }
  });

  r.check("trace formula consistency", [&] {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    for (int t = 0; t < 6; ++t) {
      MetaplecticElement e = random_mp_element_stratified(rng, s1, std1);
      Complex u = std::polar(1.0, phase(rng));
      FixedPointDatum d = make_fixed_point_datum(e.g, e.z, u, std::nullopt, e.z);
      TraceQuery q{3, {d}};
      expect_near(trace_estimate(q), trace_estimate_halfform(q, 1), 1e-10,
                  "indexed and determinant forms disagree");
      Complex w = std::polar(1.0, phase(rng));
      TraceQuery q2 = q;
      q2.data[0].u *= w;
      expect_near(trace_estimate(q2), trace_estimate(q) * std::pow(w, q.k), 1e-10,
                  "k-homogeneity in the fiber weight");
    }
  });

  r.check("json round trip", [&] {
    std::mt19937_64 rng(24);
    MetaplecticElement e = random_mp_element(rng, s1, random_polarization(rng, s1));
    Json j = to_json(e);
    MetaplecticElement back = mp_element_from_json(
        Json{{"g", j["g"]}, {"z", j["z"]}, {"ref", j["ref"]}}, "$");
    expect(back.g.m.isApprox(e.g.m, 1e-12) && std::abs(back.z - e.z) < 1e-12,
           "element does not survive the round trip");
    bool threw = false;
    try {
      cmat_from_json(Json::parse(R"([[1, 2], [3]])"), "$.g");
    } catch (const input_error&) {
      threw = true;
    }
    expect(threw, "ragged matrix accepted");
    threw = false;
    try {
      require_schema_tag(Json{{"schema", "mpwb/0"}});
    } catch (const input_error&) {
      threw = true;
    }
    expect(threw, "wrong schema accepted");
  });

  r.check("gram matrices", [&] {
    std::mt19937_64 rng(25);
    BargmannBasis b2 = basis(random_polarization(rng, s2), 6);
    double cond = gram_condition(b2.gram);
    expect(std::isfinite(cond) && cond >= 1.0, "Gram condition number out of range");
    BargmannBasis b1 = basis(random_polarization(rng, s1), 6);
    for (Eigen::Index i = 0; i < b1.gram.rows(); ++i) {
      for (Eigen::Index j = 0; j < b1.gram.cols(); ++j) {
        int di = multi_degree(b1.degrees[static_cast<std::size_t>(i)]);
        int dj = multi_degree(b1.degrees[static_cast<std::size_t>(j)]);
        if (di != dj) {
          double scale = std::sqrt(std::abs(b1.gram(i, i).real() * b1.gram(j, j).real()));
          expect(std::abs(b1.gram(i, j)) <= 1e-10 * scale,
                 "monomials of different degree not orthogonal");
        }
      }
    }
  });

  out << r.passed() << " passed, " << r.failed() << " failed\n";
  return r.failed();
}

}  // namespace mpwb
