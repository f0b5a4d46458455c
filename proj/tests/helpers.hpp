#pragma once

#include <catch_amalgamated.hpp>
#include <mpwb/mpwb.hpp>

namespace mpwb::testing {

inline double dist(Complex a, Complex b) { return std::abs(a - b); }

// |a - b| below tol, scaled by the magnitude of the expected value
inline bool cnear(Complex a, Complex b, double tol = 1e-9) {
  return dist(a, b) <= tol * std::max(1.0, std::abs(b));
}

template <typename A, typename B>
bool mnear(const A& a, const B& b, double tol = 1e-9) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  double scale = std::max(1.0, double(b.norm()));
  double err = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      err = std::max(err, std::abs(Complex(a(i, j)) - Complex(b(i, j))));
    }
  }
  return err <= tol * scale;
}

}  // namespace mpwb::testing
