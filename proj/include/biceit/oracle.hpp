#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "biceit/model.hpp"

namespace biceit {

// Full density matrix in the basis {|1>, |2>, |3>}, rotating frame of the
// probe (1-3) and the average coupling frequency (2-3).
using DensityMatrix = Eigen::Matrix3cd;

struct IntegrationSettings {
  double dt = 0.0;             // <= 0: pick from the fastest rate in play
  double steady_tol = 1e-12;   // stroboscopic map convergence target
  int samples_per_period = 256;
  int settle_periods = 8;      // never report convergence earlier
  int max_periods = 10000;
  double min_total_time = 0.0; // extra floor on the integration time
};

// Right-hand side of the Lindblad master equation at time t. Population
// decays from |3> into |1> and |2> with the branching fractions; a pure
// dephasing term damps the 2-1 coherence at gamma21. The drive enters
// through a time-dependent coupling Rabi frequency
//   omega_c(t) = omega_c1 e^{-i delta t} + omega_c2 e^{+i delta t}.
DensityMatrix rho_derivative(const DensityMatrix& rho, double t,
                             const AtomicLevelScheme& scheme,
                             const BichromaticDrive& drive,
                             const ProbeField& probe);

double default_time_step(const AtomicLevelScheme& scheme,
                         const BichromaticDrive& drive,
                         const ProbeField& probe);

struct PeriodicSteadyState {
  std::vector<DensityMatrix> samples;  // one drive period, evenly spaced
  std::vector<double> times;           // absolute sample times
  double period = 0.0;
  double dt = 0.0;
  int periods_elapsed = 0;
  double strobe_residual = 0.0;  // max entry change over the last period
};

// Fixed-step RK4 until the state one period apart stops changing. The
// drive period is 2 pi / delta; for a static drive (delta == 0) an
// arbitrary observation period 2 pi / gamma is used. Throws
// ConvergenceError when max_periods elapse without convergence.
PeriodicSteadyState integrate_to_periodic_steady_state(
    const DensityMatrix& rho0, const AtomicLevelScheme& scheme,
    const BichromaticDrive& drive, const ProbeField& probe,
    const IntegrationSettings& settings = {});

// Fourier coefficient of matrix element (bra, ket), 1-based indices, at
// harmonic n of the drive period:
//   c_n = (1/S) sum_k rho_{bra,ket}(t_k) e^{+i n (2 pi / T) t_k}.
// n must resolve on the sample grid: |n| <= samples_per_period/2 - 1.
std::complex<double> extract_harmonic(const PeriodicSteadyState& steady,
                                      int bra, int ket, int n);

// Physicality audits used by the validity checks.
double trace_error(const DensityMatrix& rho);
double hermiticity_error(const DensityMatrix& rho);
double min_eigenvalue(const DensityMatrix& rho);

}  // namespace biceit
