#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <stdexcept>
#include <string>

namespace mpwb {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr Complex kI{0.0, 1.0};

// Default tolerances: invariant checks are relative 1e-9; index determination
// accepts residuals up to 1e-6 and rejects beyond that.
inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kResidualTol = 1e-6;

// Thrown when inputs are mathematically inadmissible (degenerate fixed point,
// non-positive polarization, index residual too large, ...).  CLI exit 2.
struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed external input (JSON schema, missing fields).  CLI exit 3.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an internal consistency check fails; indicates a bug, not bad data.
struct internal_error : std::runtime_error {
  explicit internal_error(const std::string& what) : std::runtime_error(what) {}
};

inline void check_domain(bool ok, const std::string& msg) {
  if (!ok) throw domain_error(msg);
}

inline void check_input(bool ok, const std::string& msg) {
  if (!ok) throw input_error(msg);
}

inline void check_internal(bool ok, const std::string& msg) {
  if (!ok) throw internal_error(msg);
}

// Scale-aware comparison helpers.
inline bool approx_equal(double a, double b, double tol = kDefaultTol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool approx_equal(const Complex& a, const Complex& b, double tol = kDefaultTol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

template <typename DerivedA, typename DerivedB>
bool approx_equal(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                  double tol = kDefaultTol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  double scale = std::max({1.0, a.norm(), b.norm()});
  return (a.derived().template cast<Complex>() - b.derived().template cast<Complex>()).norm() <=
         tol * scale;
}

// Sum of principal logarithms of the eigenvalues.  Well-defined as long as the
// spectrum avoids the closed negative real axis; all call sites guarantee a
// spectrum in the open right half-plane and we verify that here.
inline Complex log_det_principal(const CMat& m, const std::string& who) {
  Eigen::ComplexEigenSolver<CMat> es(m, /*computeEigenvectors=*/false);
  check_internal(es.info() == Eigen::Success, who + ": eigensolver failed");
  Complex sum = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Complex lambda = es.eigenvalues()(i);
    check_domain(lambda.real() > 0.0,
                 who + ": eigenvalue off the right half-plane, principal branch undefined");
    sum += std::log(lambda);
  }
  return sum;
}

// Inverse square root of a Hermitian positive definite matrix.
inline CMat hermitian_inverse_sqrt(const CMat& g, const std::string& who) {
  Eigen::SelfAdjointEigenSolver<CMat> es(g);
  check_internal(es.info() == Eigen::Success, who + ": Hermitian eigensolver failed");
  check_domain(es.eigenvalues().minCoeff() > 0.0, who + ": matrix not positive definite");
  CVec inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse().cast<Complex>();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

// i^m for m mod 4, exact.
inline Complex i_power(int m) {
  switch (((m % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace mpwb
