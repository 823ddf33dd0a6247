#include "biceit/oracle.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace biceit {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

DensityMatrix rho_derivative(const DensityMatrix& rho, double t,
                             const AtomicLevelScheme& scheme,
                             const BichromaticDrive& drive,
                             const ProbeField& probe) {
  const double delta_c = average_coupling_detuning(drive);
  const std::complex<double> omega_c =
      drive.omega_c1 * std::exp(-kI * (drive.delta * t)) +
      drive.omega_c2 * std::exp(kI * (drive.delta * t));

  // Sign convention: couplings enter H with a minus sign so that the
  // steady-state 3-1 coherence has a positive imaginary part on an
  // absorbing line (d rho_31 / dt = +i omega_p / 2 for rho = |1><1|).
  // Flipping the sign of |3> makes this choice; it has no physical effect.
  Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
  h(1, 1) = -(probe.delta_p - delta_c);
  h(2, 2) = -probe.delta_p;
  h(2, 0) = -0.5 * probe.omega_p;
  h(0, 2) = -0.5 * probe.omega_p;
  h(2, 1) = -0.5 * omega_c;
  h(1, 2) = -0.5 * std::conj(omega_c);

  DensityMatrix d = -kI * (h * rho - rho * h);

  const double gamma_out = (scheme.branch_31 + scheme.branch_32) * scheme.gamma;
  d(0, 0) += scheme.branch_31 * scheme.gamma * rho(2, 2);
  d(1, 1) += scheme.branch_32 * scheme.gamma * rho(2, 2);
  d(2, 2) -= gamma_out * rho(2, 2);
  d(0, 2) -= 0.5 * gamma_out * rho(0, 2);
  d(2, 0) -= 0.5 * gamma_out * rho(2, 0);
  d(1, 2) -= 0.5 * gamma_out * rho(1, 2);
  d(2, 1) -= 0.5 * gamma_out * rho(2, 1);

  d(0, 1) -= scheme.gamma21 * rho(0, 1);
  d(1, 0) -= scheme.gamma21 * rho(1, 0);
  d(1, 2) -= scheme.gamma21 * rho(1, 2);
  d(2, 1) -= scheme.gamma21 * rho(2, 1);

  return d;
}

double default_time_step(const AtomicLevelScheme& scheme,
                         const BichromaticDrive& drive,
                         const ProbeField& probe) {
  double fastest = scheme.gamma;
  fastest = std::max(fastest, drive.omega_c1);
  fastest = std::max(fastest, drive.omega_c2);
  fastest = std::max(fastest, drive.delta);
  fastest = std::max(fastest, std::abs(drive.delta_c2));
  fastest = std::max(fastest, std::abs(probe.delta_p));
  fastest = std::max(fastest, probe.omega_p);
  // 0.002 per fastest cycle keeps the RK4 truncation error well below the
  // 1e-6 level probed by the dt-halving check.
  return 0.002 / fastest;
}

namespace {

void rk4_step(DensityMatrix& rho, double t, double dt,
              const AtomicLevelScheme& scheme, const BichromaticDrive& drive,
              const ProbeField& probe) {
  const DensityMatrix k1 = rho_derivative(rho, t, scheme, drive, probe);
  const DensityMatrix k2 =
      rho_derivative(rho + 0.5 * dt * k1, t + 0.5 * dt, scheme, drive, probe);
  const DensityMatrix k3 =
      rho_derivative(rho + 0.5 * dt * k2, t + 0.5 * dt, scheme, drive, probe);
  const DensityMatrix k4 =
      rho_derivative(rho + dt * k3, t + dt, scheme, drive, probe);
  rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

PeriodicSteadyState integrate_to_periodic_steady_state(
    const DensityMatrix& rho0, const AtomicLevelScheme& scheme,
    const BichromaticDrive& drive, const ProbeField& probe,
    const IntegrationSettings& settings) {
  if (settings.samples_per_period < 2)
    throw ValidationError("integration: samples_per_period must be >= 2");
  if (settings.settle_periods < 1 || settings.max_periods < 1)
    throw ValidationError("integration: period counts must be >= 1");
  if (!(settings.steady_tol > 0))
    throw ValidationError("integration: steady_tol must be positive");

  const double period = drive.delta > 0
                            ? 2.0 * std::numbers::pi / drive.delta
                            : 2.0 * std::numbers::pi / scheme.gamma;

  const double dt_req = settings.dt > 0
                            ? settings.dt
                            : default_time_step(scheme, drive, probe);
  // Steps per period: multiple of samples_per_period so the sample grid is
  // exactly commensurate with the drive.
  const int chunks = std::max(
      1, static_cast<int>(std::ceil(
             period / (dt_req * settings.samples_per_period))));
  const long steps_per_period =
      static_cast<long>(chunks) * settings.samples_per_period;
  const double dt = period / static_cast<double>(steps_per_period);
  const long stride = chunks;

  const double slow = scheme.gamma21 > 0
                          ? std::min(scheme.gamma, scheme.gamma21)
                          : scheme.gamma;
  double floor_time = std::max(20.0 / slow, settings.settle_periods * period);
  floor_time = std::max(floor_time, settings.min_total_time);

  PeriodicSteadyState out;
  out.period = period;
  out.dt = dt;
  out.samples.assign(settings.samples_per_period, DensityMatrix::Zero());
  out.times.assign(settings.samples_per_period, 0.0);

  DensityMatrix rho = rho0;
  DensityMatrix strobe_prev = rho;
  std::complex<double> strobe31_prev = rho(2, 0);

  for (int p = 0; p < settings.max_periods; ++p) {
    const double t_base = p * period;
    for (long s = 0; s < steps_per_period; ++s) {
      if (s % stride == 0) {
        const long k = s / stride;
        out.samples[k] = rho;
        out.times[k] = t_base + s * dt;
      }
      rk4_step(rho, t_base + s * dt, dt, scheme, drive, probe);
    }

    const double residual = (rho - strobe_prev).cwiseAbs().maxCoeff();
    strobe31_prev = strobe_prev(2, 0);
    strobe_prev = rho;
    out.periods_elapsed = p + 1;
    out.strobe_residual = residual;

    const double t_now = (p + 1) * period;
    if (p + 1 >= settings.settle_periods && residual < settings.steady_tol &&
        t_now >= floor_time)
      return out;
  }

  throw ConvergenceError(
      "periodic steady state not reached after " +
          std::to_string(settings.max_periods) +
          " periods (strobe residual " + std::to_string(out.strobe_residual) +
          ", tol " + std::to_string(settings.steady_tol) + ")",
      strobe_prev(2, 0), strobe31_prev);
}

std::complex<double> extract_harmonic(const PeriodicSteadyState& steady,
                                      int bra, int ket, int n) {
  if (bra < 1 || bra > 3 || ket < 1 || ket > 3)
    throw ValidationError("extract_harmonic: element indices must be 1..3");
  const int s = static_cast<int>(steady.samples.size());
  if (s < 2) throw ValidationError("extract_harmonic: empty trajectory");
  if (std::abs(n) > s / 2 - 1)
    throw ValidationError(
        "extract_harmonic: harmonic " + std::to_string(n) +
        " is not resolvable with " + std::to_string(s) +
        " samples per period");

  const double omega = 2.0 * std::numbers::pi / steady.period;
  std::complex<double> acc = 0.0;
  for (int k = 0; k < s; ++k) {
    const std::complex<double> phase =
        std::exp(kI * (n * omega * steady.times[k]));
    acc += steady.samples[k](bra - 1, ket - 1) * phase;
  }
  return acc / static_cast<double>(s);
}

double trace_error(const DensityMatrix& rho) {
  return std::abs(rho.trace() - std::complex<double>(1.0));
}

double hermiticity_error(const DensityMatrix& rho) {
  return (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const DensityMatrix& rho) {
  const DensityMatrix sym = 0.5 * (rho + rho.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(sym);
  return es.eigenvalues().minCoeff();
}

}  // namespace biceit
