#pragma once

// Gaussian integrals on R^d with complex quadratic weights, and moments of
// products of linear forms against them.  This is the integration backend for
// the Bargmann kernel calculus: every operator matrix entry is
//
//     integral of  (product of linear forms)^powers * exp(x^T K x / 2 + l^T x)
//
// for some complex symmetric K with negative definite real part.
//
// The design deliberately avoids expanding polynomials in coordinates.  We
// work with the *forms* directly: if Sigma = (-K)^{-1} is the (complex)
// covariance and the forms are rows of L, then the form covariance V = L
// Sigma L^T and form means mu = L x0 determine all moments through the
// Gaussian recursion
//
//     E[m] = mu_i E[m - e_i] + sum_j (m - e_i)_j V_ij E[m - e_i - e_j]
//
// (Stein's identity applied to the first form with a positive power), which
// is a polynomial identity in (mu, V) and therefore survives analytic
// continuation to complex covariance.  Memoising on the power multi-index
// keeps high-degree diagonals cheap.

#include <cmath>
#include <map>
#include <vector>

#include "mpwb/core.hpp"

namespace mpwb {

namespace detail {

// Symmetric part of the real part of K must be negative definite for the
// integral to converge; this is the only convergence condition we need.
inline void require_convergent(const CMat& k, const char* who) {
  check_input(k.rows() == k.cols(), std::string(who) + ": K must be square");
  check_input(approx_equal(k, CMat(k.transpose()), 1e-10),
              std::string(who) + ": K must be symmetric");
  Mat re = 0.5 * (k.real() + k.real().transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(re);
  check_domain(es.eigenvalues().maxCoeff() < 0.0,
               std::string(who) + ": Re(K) must be negative definite");
}

}  // namespace detail

// integral over R^d of exp(x^T K x / 2) dx  =  (2 pi)^{d/2} / sqrt(det(-K)).
//
// The square root uses the principal branch eigenvalue by eigenvalue.  Since
// the numerical range of -K lies in the open right half plane whenever Re(K)
// is negative definite, no eigenvalue can touch the branch cut, and the
// result is continuous on that (convex) set of weights.
inline Complex gaussian_normalization(const CMat& k) {
  detail::require_convergent(k, "gaussian_normalization");
  const auto d = static_cast<double>(k.rows());
  Complex half_log_det = 0.5 * log_det_principal(CMat(-k), "gaussian_normalization");
  return std::exp(0.5 * d * std::log(2.0 * kPi) - half_log_det);
}

// integral of exp(x^T K x / 2 + l^T x): complete the square at x0 = -K^{-1} l.
inline Complex gaussian_integral(const CMat& k, const CVec& ell) {
  detail::require_convergent(k, "gaussian_integral");
  check_input(ell.size() == k.rows(), "gaussian_integral: l has wrong size");
  CVec x0 = CMat(-k).fullPivLu().solve(ell);
  // bilinear pairing, not the Hermitian dot
  return gaussian_normalization(k) * std::exp(0.5 * (ell.transpose() * x0)(0));
}

// A Gaussian weight together with a fixed family of linear forms, set up for
// repeated moment queries.  `integral(powers)` returns
//
//     integral of prod_i (L x)_i^{powers_i} * exp(x^T K x / 2 + l^T x) dx
//
// and the memo is shared across queries, so pulling a whole operator block
// out of one weight costs little more than its highest-degree entry.
class GaussianForms {
 public:
  GaussianForms(const CMat& k, const CVec& ell, const CMat& forms) {
    detail::require_convergent(k, "GaussianForms");
    check_input(ell.size() == k.rows(), "GaussianForms: l has wrong size");
    check_input(forms.cols() == k.rows(), "GaussianForms: forms have wrong width");
    CMat minus_k = -k;
    Eigen::FullPivLU<CMat> lu(minus_k);
    CVec x0 = lu.solve(ell);
    CMat sigma = lu.solve(CMat::Identity(k.rows(), k.cols()));
    v_ = forms * sigma * forms.transpose();
    mu_ = forms * x0;
    norm_ = gaussian_normalization(k) * std::exp(0.5 * (ell.transpose() * x0)(0));
    memo_[std::vector<int>(static_cast<std::size_t>(forms.rows()), 0)] = Complex(1.0, 0.0);
  }

  // Normalised moment E[prod f_i^{powers_i}] of the forms.
  Complex moment(const std::vector<int>& powers) {
    check_input(powers.size() == static_cast<std::size_t>(mu_.size()),
                "GaussianForms: powers has wrong length");
    for (int p : powers) check_input(p >= 0, "GaussianForms: negative power");
    return moment_rec(powers);
  }

  Complex integral(const std::vector<int>& powers) { return norm_ * moment(powers); }

  Complex normalization() const { return norm_; }

 private:
  Complex moment_rec(const std::vector<int>& m) {
    auto it = memo_.find(m);
    if (it != memo_.end()) return it->second;
    std::size_t i = 0;
    while (m[i] == 0) ++i;
    std::vector<int> rest = m;
    rest[i] -= 1;
    Complex acc = mu_(static_cast<Eigen::Index>(i)) * moment_rec(rest);
    for (std::size_t j = 0; j < rest.size(); ++j) {
      if (rest[j] == 0) continue;
      std::vector<int> rest2 = rest;
      rest2[j] -= 1;
      acc += static_cast<double>(rest[j]) *
             v_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * moment_rec(rest2);
    }
    memo_[m] = acc;
    return acc;
  }

  CMat v_;
  CVec mu_;
  Complex norm_;
  std::map<std::vector<int>, Complex> memo_;
};

// A polynomial as a plain coefficient table: sum of coeff * prod_i v_i^{powers_i}
// over whatever variables the context supplies (coordinates, holomorphic
// coordinates, ...).  Nothing fancy; the moment engine does the real work.
struct PolyTerm {
  Complex coeff;
  std::vector<int> powers;
};
using Polynomial = std::vector<PolyTerm>;

inline Polynomial constant_poly(Complex value, int vars) {
  return {PolyTerm{value, std::vector<int>(static_cast<std::size_t>(vars), 0)}};
}

// integral of poly(x) * exp(x^T K x / 2 + l^T x) dx, poly given in the
// coordinates of x itself.
inline Complex gaussian_moment_integral(const CMat& k, const CVec& ell, const Polynomial& poly) {
  GaussianForms gf(k, ell, CMat::Identity(k.rows(), k.cols()));
  Complex acc(0.0, 0.0);
  for (const auto& term : poly) acc += term.coeff * gf.integral(term.powers);
  return acc;
}

// Multi-indices in `vars` variables with total degree <= max_degree, graded
// lexicographic: degree first, then lex within a degree.  This fixes the
// ordering of every polynomial basis in the Bargmann module, so truncation to
// "degree <= N" is always a leading block.
inline std::vector<std::vector<int>> graded_multi_indices(int vars, int max_degree) {
  check_input(vars >= 1, "graded_multi_indices: need at least one variable");
  check_input(max_degree >= 0, "graded_multi_indices: negative degree");
  std::vector<std::vector<int>> out;
  std::vector<int> idx(static_cast<std::size_t>(vars), 0);
  for (int deg = 0; deg <= max_degree; ++deg) {
    std::fill(idx.begin(), idx.end(), 0);
    idx[0] = deg;
    while (true) {
      out.push_back(idx);
      // step to the next composition of deg: move one unit of weight from the
      // last positive entry before the final slot, sweeping the tail with it
      int k = vars - 2;
      while (k >= 0 && idx[static_cast<std::size_t>(k)] == 0) --k;
      if (k < 0) break;
      int tail = idx[static_cast<std::size_t>(vars - 1)];
      idx[static_cast<std::size_t>(k)] -= 1;
      idx[static_cast<std::size_t>(vars - 1)] = 0;
      idx[static_cast<std::size_t>(k + 1)] = tail + 1;
    }
  }
  return out;
}

inline int multi_degree(const std::vector<int>& m) {
  int d = 0;
  for (int p : m) d += p;
  return d;
}

}  // namespace mpwb
