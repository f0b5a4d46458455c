// Quantizing a phase-space rotation reproduces the harmonic oscillator: the
// operator attached to the lifted rotation by phi is diagonal on the monomial
// basis with eigenvalues e^{-i(k + 1/2) phi}.  The half-integer offset — the
// ground state energy — is exactly the half-form correction; without it the
// lift would not square to the identity cocycle.
//
// Usage: oscillator_spectrum [phi] [max_degree]

#include <mpwb/mpwb.hpp>

#include <cstdio>
#include <cstdlib>

using namespace mpwb;

int main(int argc, char** argv) {
  double phi = argc > 1 ? std::atof(argv[1]) : 0.7;
  int max_degree = argc > 2 ? std::atoi(argv[2]) : 10;

  SymplecticSpace s = standard_space(1);
  PositivePolarization p = standard_polarization(s);

  Mat rot(2, 2);
  rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  MetaplecticElement lift = make_mp_element(make_symplectomorphism(s, rot),
                                            std::polar(1.0, -phi / 2.0), p);

  OperatorMatrix u = operator_matrix(dmor_from_mp(lift), max_degree);

  std::printf("rotation by phi = %.6f, truncated at degree %d\n", phi, max_degree);
  std::printf("%4s  %22s  %22s  %10s\n", "k", "diagonal entry", "e^{-i(k+1/2)phi}", "deviation");
  double off_diagonal = 0.0;
  for (Eigen::Index i = 0; i < u.entries.rows(); ++i) {
    Complex got = u.entries(i, i);
    Complex want = std::polar(1.0, -(static_cast<double>(i) + 0.5) * phi);
    std::printf("%4lld  %10.6f %+10.6fi  %10.6f %+10.6fi  %10.2e\n",
                static_cast<long long>(i), got.real(), got.imag(), want.real(), want.imag(),
                std::abs(got - want));
    for (Eigen::Index j = 0; j < u.entries.cols(); ++j) {
      if (i != j) off_diagonal = std::max(off_diagonal, std::abs(u.entries(i, j)));
    }
  }
  std::printf("largest off-diagonal entry: %.2e\n", off_diagonal);

  // the spectrum read back as oscillator levels: arg of the diagonal / -phi
  std::printf("\nrecovered energy levels (k + 1/2):");
  for (Eigen::Index i = 0; i < u.entries.rows() && i < 6; ++i) {
    double level = -std::arg(u.entries(i, i)) / phi;
    if (level < 0.0) level += 2.0 * kPi / phi;  // unwrap past the branch cut
    std::printf(" %.4f", level);
  }
  std::printf(" ...\n");
  return 0;
}
