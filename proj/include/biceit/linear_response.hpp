#pragma once

#include <complex>
#include <vector>

#include "biceit/model.hpp"

namespace biceit {

// Weak-probe equations of motion for the optical coherence a = rho_31 and
// the ground-state coherence b = rho_21, with the population pinned in |1>:
//
//   da/dt = (i delta_p - gamma/2) a + i omega_p / 2
//           + (i/2)(omega_c1 e^{-i delta t} + omega_c2 e^{+i delta t}) b
//   db/dt = (i (delta_p - delta_c) - gamma21) b
//           + (i/2)(omega_c1 e^{+i delta t} + omega_c2 e^{-i delta t}) a
//
// The periodic steady state a(t) = sum_n a_n e^{-i n delta t} (same for b)
// turns these into a three-term recurrence in the harmonic index:
//
//   D_a(n) a_n = (i omega_p / 2) delta_{n,0}
//                + (i/2)(omega_c1 b_{n-1} + omega_c2 b_{n+1})
//   D_b(n) b_n = (i/2)(omega_c1 a_{n+1} + omega_c2 a_{n-1})
//
// with D_a(n) = gamma/2 - i(delta_p + n delta) and
// D_b(n) = gamma21 - i(delta_p - delta_c + n delta). Only even a_n and odd
// b_n can be nonzero: the source sits at n = 0 and every coupling hop
// changes n by one.
struct Recurrence {
  double gamma = 1.0;
  double gamma21 = 0.0;
  double omega_c1 = 0.0;
  double omega_c2 = 0.0;
  double omega_p = 0.0;
  double delta = 0.0;
  double delta_p = 0.0;
  double delta_c = 0.0;

  std::complex<double> diag_a(int n) const {
    return {0.5 * gamma, -(delta_p + n * delta)};
  }
  std::complex<double> diag_b(int n) const {
    return {gamma21, -(delta_p - delta_c + n * delta)};
  }
  std::complex<double> source() const { return {0.0, 0.5 * omega_p}; }
};

Recurrence build_recurrence(const AtomicLevelScheme& scheme,
                            const BichromaticDrive& drive,
                            const ProbeField& probe);

// Harmonic coefficients for |n| <= n_max; out-of-range queries return 0.
struct HarmonicSpectrum {
  int n_max = 0;
  std::vector<std::complex<double>> a;  // index n + n_max
  std::vector<std::complex<double>> b;

  std::complex<double> a_coeff(int n) const {
    return std::abs(n) > n_max ? std::complex<double>(0.0)
                               : a[static_cast<size_t>(n + n_max)];
  }
  std::complex<double> b_coeff(int n) const {
    return std::abs(n) > n_max ? std::complex<double>(0.0)
                               : b[static_cast<size_t>(n + n_max)];
  }
  std::complex<double> a0() const { return a_coeff(0); }
};

// Direct solve of the truncated recurrence (closure b_{+-(n_max+1)} = 0) as
// one banded linear system. The unknowns are interleaved, a_n then b_n per
// harmonic, giving bandwidth 3. Verifies the residual afterwards.
HarmonicSpectrum solve_banded(const Recurrence& rec, int n_max);

// Same quantity by continued fractions: eliminating the odd b_n leaves a
// three-term recurrence over even a_n only, whose outward solution decays
// and is summed as descending/ascending ratio fractions. The depth doubles
// until a_0 moves by less than rel_tol of itself.
HarmonicSpectrum solve_continued_fraction(const Recurrence& rec,
                                          double rel_tol,
                                          int start_depth = 8);

struct ProbeResponse {
  double delta_p = 0.0;
  double absorption = 0.0;  // Im(a_0) gamma / omega_p
  double dispersion = 0.0;  // Re(a_0) gamma / omega_p
  std::complex<double> a0;
  int truncation = 0;  // harmonic order the result was accepted at
};

// Truncation order the adaptive solve starts from.
int initial_truncation(const BichromaticDrive& drive);

// End-to-end steady-state probe response. With settings.adaptive the
// truncation starts at initial_truncation() and doubles until a_0 is
// stable to settings.rel_tol; otherwise settings.n_max is used as is.
ProbeResponse probe_response(const AtomicLevelScheme& scheme,
                             const BichromaticDrive& drive,
                             const ProbeField& probe,
                             const SolverSettings& settings);

}  // namespace biceit
