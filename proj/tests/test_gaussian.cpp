#include "helpers.hpp"

using namespace mpwb;
using mpwb::testing::cnear;

TEST_CASE("gaussian normalization", "[gaussian]") {
  CMat k1 = -CMat::Identity(2, 2);
  CHECK(cnear(gaussian_normalization(k1), 2.0 * kPi, 1e-12));

  CMat k2 = CMat::Zero(2, 2);
  k2(0, 0) = -1.0;
  k2(1, 1) = -4.0;
  CHECK(cnear(gaussian_normalization(k2), kPi, 1e-12));  // 2 pi / sqrt(4)

  SECTION("complex weight stays on the principal branch") {
    CMat k(1, 1);
    k(0, 0) = Complex(-1.0, 0.8);
    Complex want = std::sqrt(2.0 * kPi / Complex(1.0, -0.8));
    CHECK(cnear(gaussian_normalization(k), want, 1e-12));
  }

  SECTION("convergence is enforced") {
    CMat pos(1, 1);
    pos(0, 0) = 1.0;
    CHECK_THROWS_AS(gaussian_normalization(pos), domain_error);

    CMat skew(2, 2);
    skew << -1.0, 0.3, 0.0, -1.0;
    CHECK_THROWS_AS(gaussian_normalization(skew), input_error);
  }
}

TEST_CASE("linear terms complete the square", "[gaussian]") {
  CMat k = -CMat::Identity(2, 2);
  CVec ell(2);
  ell << Complex(1.0, 0.0), Complex(2.0, 0.0);
  CHECK(cnear(gaussian_integral(k, ell), 2.0 * kPi * std::exp(2.5), 1e-10));

  // imaginary source: the exponent ell^T x0 / 2 is bilinear, not Hermitian
  ell << kI, Complex(0.0, 0.0);
  CHECK(cnear(gaussian_integral(k, ell), 2.0 * kPi * std::exp(-0.5), 1e-12));

  CVec wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(gaussian_integral(k, wrong), input_error);
}

TEST_CASE("moments of the standard weight", "[gaussian]") {
  CMat k(1, 1);
  k(0, 0) = -1.0;
  CVec ell = CVec::Zero(1);

  auto moment = [&](int p) {
    return gaussian_moment_integral(k, ell, Polynomial{PolyTerm{Complex(1.0, 0.0), {p}}});
  };

  double root = std::sqrt(2.0 * kPi);
  CHECK(cnear(moment(0), root, 1e-12));
  CHECK(cnear(moment(2), root, 1e-12));
  CHECK(cnear(moment(4), 3.0 * root, 1e-12));    // double factorial 3!!
  CHECK(cnear(moment(6), 15.0 * root, 1e-11));   // 5!!
  CHECK(cnear(moment(1), 0.0, 1e-13));
  CHECK(cnear(moment(3), 0.0, 1e-13));
  CHECK(cnear(moment(7), 0.0, 1e-12));
}

TEST_CASE("form moments via the covariance recursion", "[gaussian]") {
  // two forms f1 = x + y, f2 = x - y against the standard weight
  CMat k = -CMat::Identity(2, 2);
  CVec ell = CVec::Zero(2);
  CMat forms(2, 2);
  forms << 1.0, 1.0, 1.0, -1.0;
  GaussianForms gf(k, ell, forms);

  CHECK(cnear(gf.moment({0, 0}), 1.0, 1e-14));
  CHECK(cnear(gf.moment({2, 0}), 2.0, 1e-12));  // Var(x + y)
  CHECK(cnear(gf.moment({1, 1}), 0.0, 1e-13));  // the forms are uncorrelated
  CHECK(cnear(gf.moment({2, 2}), 4.0, 1e-12));  // V11 V22 + 2 V12^2

  SECTION("fourth-moment identity with complex covariance") {
    CMat kc(2, 2);
    kc << Complex(-1.0, 0.3), Complex(0.2, 0.1), Complex(0.2, 0.1), Complex(-1.5, -0.2);
    CMat lc(2, 2);
    lc << Complex(1.0, 0.0), Complex(0.0, 1.0), Complex(0.5, 0.0), Complex(1.0, 0.0);
    GaussianForms g(kc, CVec::Zero(2), lc);
    CMat sigma = CMat(-kc).fullPivLu().solve(CMat::Identity(2, 2));
    CMat v = lc * sigma * lc.transpose();
    // Isserlis: E[f1^2 f2^2] = V11 V22 + 2 V12^2 for centred Gaussians
    CHECK(cnear(g.moment({2, 2}), v(0, 0) * v(1, 1) + 2.0 * v(0, 1) * v(0, 1), 1e-11));
    CHECK(cnear(g.moment({4, 0}), 3.0 * v(0, 0) * v(0, 0), 1e-11));
  }

  SECTION("shifted weight produces mean terms") {
    CVec src(2);
    src << Complex(0.7, 0.0), Complex(-0.3, 0.0);
    GaussianForms g(k, src, forms);
    // x0 = src, so E[f1] = 0.7 - 0.3 = 0.4 and E[f1^2] = Var + mean^2
    CHECK(cnear(g.moment({1, 0}), 0.4, 1e-12));
    CHECK(cnear(g.moment({2, 0}), 2.0 + 0.16, 1e-12));
  }

  SECTION("query validation") {
    CHECK_THROWS_AS(gf.moment({1}), input_error);
    CHECK_THROWS_AS(gf.moment({-1, 0}), input_error);
  }
}

TEST_CASE("graded multi-index enumeration", "[gaussian]") {
  auto idx = graded_multi_indices(2, 3);
  std::vector<std::vector<int>> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                        {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  REQUIRE(idx.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(idx[i] == want[i]);

  CHECK(graded_multi_indices(1, 4).size() == 5);
  CHECK(graded_multi_indices(3, 4).size() == 35);  // C(3 + 4, 3)

  SECTION("degree is monotone along the enumeration") {
    auto big = graded_multi_indices(3, 6);
    for (std::size_t i = 1; i < big.size(); ++i) {
      CHECK(multi_degree(big[i - 1]) <= multi_degree(big[i]));
    }
  }

  CHECK(multi_degree({2, 0, 5}) == 7);
  CHECK_THROWS_AS(graded_multi_indices(0, 3), input_error);
  CHECK_THROWS_AS(graded_multi_indices(2, -1), input_error);
}
