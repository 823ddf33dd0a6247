#include <cmath>
#include <complex>

#include "biceit/linear_response.hpp"
#include "biceit/oracle.hpp"
#include "doctest.h"

using namespace biceit;
using cplx = std::complex<double>;

namespace {

AtomicLevelScheme closed_scheme() {
  AtomicLevelScheme s;
  s.gamma = 1.0;
  s.branch_31 = 0.5;
  s.branch_32 = 0.5;
  s.gamma21 = 0.01;
  return s;
}

BichromaticDrive fig_drive() {
  BichromaticDrive d;
  d.omega_c1 = 0.4;
  d.omega_c2 = 0.4;
  d.delta = 0.7;
  d.delta_c2 = 0.7;
  return d;
}

ProbeField weak_probe(double delta_p) {
  ProbeField p;
  p.omega_p = 0.01;
  p.delta_p = delta_p;
  return p;
}

DensityMatrix ground_state() {
  DensityMatrix rho = DensityMatrix::Zero();
  rho(0, 0) = 1.0;
  return rho;
}

}  // namespace

TEST_CASE("derivative pins: probe source and spontaneous decay") {
  const auto s = closed_scheme();
  const auto d = fig_drive();
  const auto p = weak_probe(0.0);

  // All population in |1>: the only motion is the probe sourcing rho_31.
  const DensityMatrix d1 = rho_derivative(ground_state(), 0.0, s, d, p);
  CHECK(std::abs(d1(2, 0) - cplx(0.0, 0.5 * p.omega_p)) < 1e-15);
  CHECK(std::abs(d1(0, 0)) < 1e-15);
  CHECK(std::abs(d1(1, 1)) < 1e-15);

  // All population in |3>: pure decay through the branching fractions.
  DensityMatrix excited = DensityMatrix::Zero();
  excited(2, 2) = 1.0;
  const DensityMatrix d3 = rho_derivative(excited, 0.3, s, d, p);
  CHECK(d3(2, 2).real() == doctest::Approx(-s.gamma).epsilon(1e-14));
  CHECK(d3(0, 0).real() ==
        doctest::Approx(s.branch_31 * s.gamma).epsilon(1e-14));
  CHECK(d3(1, 1).real() ==
        doctest::Approx(s.branch_32 * s.gamma).epsilon(1e-14));
}

TEST_CASE("derivative preserves trace and hermiticity") {
  const auto s = closed_scheme();
  const auto d = fig_drive();
  const auto p = weak_probe(0.4);

  DensityMatrix rho;
  rho << cplx(0.5, 0.0), cplx(0.1, 0.02), cplx(0.03, -0.01),
      cplx(0.1, -0.02), cplx(0.3, 0.0), cplx(0.05, 0.04),
      cplx(0.03, 0.01), cplx(0.05, -0.04), cplx(0.2, 0.0);

  for (double t : {0.0, 0.37, 2.9}) {
    const DensityMatrix drho = rho_derivative(rho, t, s, d, p);
    CHECK(std::abs(drho.trace()) < 1e-14);
    CHECK((drho - drho.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("field-free evolution decays to the dark mixture") {
  AtomicLevelScheme s = closed_scheme();
  BichromaticDrive no_drive;
  ProbeField no_probe;
  no_probe.omega_p = 0.0;

  DensityMatrix rho = DensityMatrix::Zero();
  rho(2, 2) = 1.0;

  IntegrationSettings is;
  is.min_total_time = 60.0;  // many excited-state lifetimes
  const auto steady =
      integrate_to_periodic_steady_state(rho, s, no_drive, no_probe, is);
  const DensityMatrix& final = steady.samples.back();
  CHECK(std::abs(final(0, 0) - 0.5) < 1e-10);
  CHECK(std::abs(final(1, 1) - 0.5) < 1e-10);
  CHECK(std::abs(final(2, 2)) < 1e-10);
}

TEST_CASE("extract_harmonic picks Fourier components off a synthetic orbit") {
  PeriodicSteadyState fake;
  const int S = 64;
  const double omega = 2.0;  // period pi
  fake.period = 2.0 * M_PI / omega;
  fake.dt = fake.period / S;
  const cplx c0(0.3, -0.1);
  const cplx c2(0.05, 0.2);  // enters as c2 e^{-2 i omega t}
  for (int k = 0; k < S; ++k) {
    const double t = 5.0 + k * fake.dt;  // offset start: times are absolute
    DensityMatrix rho = DensityMatrix::Zero();
    rho(2, 0) = c0 + c2 * std::exp(cplx(0.0, -2.0 * omega * t));
    fake.samples.push_back(rho);
    fake.times.push_back(t);
  }
  CHECK(std::abs(extract_harmonic(fake, 3, 1, 0) - c0) < 1e-13);
  CHECK(std::abs(extract_harmonic(fake, 3, 1, 2) - c2) < 1e-13);
  CHECK(std::abs(extract_harmonic(fake, 3, 1, 1)) < 1e-13);
  CHECK(std::abs(extract_harmonic(fake, 3, 1, -2)) < 1e-13);

  // A harmonic beyond the grid's resolving power is a usage error.
  CHECK_THROWS_AS(extract_harmonic(fake, 3, 1, S / 2), ValidationError);
  CHECK_THROWS_AS(extract_harmonic(fake, 1, 4, 0), ValidationError);
}

TEST_CASE("steady state responds linearly to the weak probe") {
  const auto s = closed_scheme();
  const auto d = fig_drive();

  IntegrationSettings is;
  is.steady_tol = 1e-13;
  const auto half = integrate_to_periodic_steady_state(
      ground_state(), s, d, weak_probe(0.35), is);
  ProbeField p2 = weak_probe(0.35);
  p2.omega_p = 0.005;
  const auto quarter =
      integrate_to_periodic_steady_state(ground_state(), s, d, p2, is);

  const cplx a_full = extract_harmonic(half, 3, 1, 0);
  const cplx a_half = extract_harmonic(quarter, 3, 1, 0);
  CHECK(std::abs(a_full - 2.0 * a_half) < 2e-3 * std::abs(a_full));
}

TEST_CASE("steady state is physical and agrees with the weak-probe solver") {
  const auto s = closed_scheme();
  const auto d = fig_drive();
  // Probe weak enough that the integrator's own nonlinearity (relative
  // omega_p^2 scale, ~1e-5 here) stays far under the comparison gate.
  ProbeField p = weak_probe(0.0);
  p.omega_p = 1e-3;

  IntegrationSettings is;
  is.steady_tol = 1e-13;
  const auto steady =
      integrate_to_periodic_steady_state(ground_state(), s, d, p, is);
  CHECK(steady.strobe_residual <= is.steady_tol);

  for (const auto& rho : steady.samples) {
    CHECK(trace_error(rho) < 1e-9);
    CHECK(hermiticity_error(rho) < 1e-12);
    CHECK(min_eigenvalue(rho) > -1e-8);
  }

  const cplx oracle_a0 = extract_harmonic(steady, 3, 1, 0);
  const cplx linear_a0 = solve_banded(build_recurrence(s, d, p), 24).a0();
  CHECK(std::abs(oracle_a0 - linear_a0) < 1e-3 * std::abs(linear_a0));
}

TEST_CASE("refusing to converge raises with the residual attached") {
  const auto s = closed_scheme();
  const auto d = fig_drive();
  IntegrationSettings is;
  is.max_periods = 2;
  is.steady_tol = 1e-15;
  CHECK_THROWS_AS(integrate_to_periodic_steady_state(ground_state(), s, d,
                                                     weak_probe(0.0), is),
                  ConvergenceError);
}

TEST_CASE("default time step resolves the fastest rate in play") {
  const auto s = closed_scheme();
  const auto p = weak_probe(0.0);
  BichromaticDrive slow = fig_drive();
  const double dt_slow = default_time_step(s, slow, p);
  BichromaticDrive fast = slow;
  fast.delta = 50.0;
  const double dt_fast = default_time_step(s, fast, p);
  CHECK(dt_fast < dt_slow);
  CHECK(dt_fast <= 0.02 * 2.0 * M_PI / 50.0);
}
