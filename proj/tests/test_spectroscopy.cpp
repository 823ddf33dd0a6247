#include <cmath>
#include <sstream>
#include <vector>

#include "biceit/spectroscopy.hpp"
#include "doctest.h"

using namespace biceit;

namespace {

AtomicLevelScheme base_scheme(double gamma21 = 0.01) {
  AtomicLevelScheme s;
  s.gamma = 1.0;
  s.branch_31 = 0.5;
  s.branch_32 = 0.5;
  s.gamma21 = gamma21;
  return s;
}

BichromaticDrive symmetric_drive(double omega, double delta) {
  BichromaticDrive d;
  d.omega_c1 = omega;
  d.omega_c2 = omega;
  d.delta = delta;
  d.delta_c2 = delta;
  return d;
}

ProbeField weak_probe() {
  ProbeField p;
  p.omega_p = 0.01;
  return p;
}

SpectrumTrace lorentzian_trace(const std::vector<double>& grid) {
  SpectrumTrace t;
  t.grid = grid;
  for (double x : grid) {
    t.absorption.push_back(0.25 / (x * x + 0.25));
    t.dispersion.push_back(-0.5 * x / (x * x + 0.25));
  }
  return t;
}

}  // namespace

TEST_CASE("scan with no coupling returns the bare Lorentzian") {
  const auto s = base_scheme();
  BichromaticDrive none;
  SolverSettings settings;
  const auto trace = scan(s, none, weak_probe(), -3.0, 3.0, 121, settings);
  REQUIRE(trace.grid.size() == 121);
  for (size_t i = 0; i < trace.grid.size(); ++i) {
    const double x = trace.grid[i];
    CHECK(std::abs(trace.absorption[i] - 0.25 / (x * x + 0.25)) < 1e-10);
    CHECK(std::abs(trace.dispersion[i] + 0.5 * x / (x * x + 0.25)) < 1e-10);
  }
  CHECK(trace.grid.front() == -3.0);
  CHECK(trace.grid.back() == 3.0);
}

TEST_CASE("scan validates its grid and propagates the failing detuning") {
  const auto s = base_scheme();
  SolverSettings settings;
  CHECK_THROWS_AS(scan(s, symmetric_drive(0.4, 0.7), weak_probe(), -1.0, 1.0,
                       1, settings),
                  ValidationError);
  CHECK_THROWS_AS(scan(s, symmetric_drive(0.4, 0.7), weak_probe(), 1.0, -1.0,
                       11, settings),
                  ValidationError);

  // A solver failure mid-scan names the detuning it happened at.
  AtomicLevelScheme fragile = base_scheme(0.0);
  SolverSettings cf;
  cf.method = SolveMethod::continued_fraction;
  try {
    scan(fragile, symmetric_drive(0.4, 0.7), weak_probe(), 0.7, 0.7001, 2, cf);
    FAIL("expected a SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("delta_p") != std::string::npos);
    CHECK(std::string(e.what()).find("0.7") != std::string::npos);
  }
}

TEST_CASE("find_peaks on synthetic spectra") {
  SpectrumTrace t;
  for (int i = 0; i <= 400; ++i) {
    const double x = -2.0 + i * 0.01;
    t.grid.push_back(x);
    const auto bump = [x](double c, double h, double w) {
      return h * w * w / ((x - c) * (x - c) + w * w);
    };
    t.absorption.push_back(bump(-1.0, 1.0, 0.05) + bump(0.4, 0.5, 0.05) +
                           bump(1.3, 0.02, 0.05));
    t.dispersion.push_back(0.0);
  }
  const auto peaks = find_peaks(t, 0.05);
  REQUIRE(peaks.positions.size() == 2);  // 2% bump falls below threshold
  CHECK(std::abs(peaks.positions[0] + 1.0) < 1e-3);
  CHECK(std::abs(peaks.positions[1] - 0.4) < 1e-3);
  CHECK(peaks.heights[0] == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(peaks.heights[1] == doctest::Approx(0.5).epsilon(5e-3));
  CHECK(peaks.prominences[0] >= peaks.prominences[1]);

  const auto all = find_peaks(t, 0.01);
  CHECK(all.positions.size() == 3);

  // Parabolic refinement recovers an off-grid center.
  SpectrumTrace off;
  for (int i = 0; i <= 200; ++i) {
    const double x = -1.0 + i * 0.01;
    off.grid.push_back(x);
    off.absorption.push_back(1.0 / ((x - 0.1234) * (x - 0.1234) + 0.01));
    off.dispersion.push_back(0.0);
  }
  const auto refined = find_peaks(off, 0.05);
  REQUIRE(refined.positions.size() == 1);
  CHECK(std::abs(refined.positions[0] - 0.1234) < 2e-4);
}

TEST_CASE("find_peaks handles plateaus and ignores the boundary") {
  SpectrumTrace t;
  t.grid = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  t.absorption = {5.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.5, 0.2, 9.0};
  t.dispersion.assign(t.grid.size(), 0.0);
  const auto peaks = find_peaks(t, 0.05);
  REQUIRE(peaks.positions.size() == 1);  // endpoints never count
  CHECK(peaks.positions[0] == doctest::Approx(3.0));  // plateau center
  CHECK(peaks.heights[0] == doctest::Approx(2.0));

  SpectrumTrace tiny;
  tiny.grid = {0, 1};
  tiny.absorption = {1, 2};
  tiny.dispersion = {0, 0};
  CHECK_THROWS_AS(find_peaks(tiny, 0.05), ValidationError);
  CHECK_THROWS_AS(find_peaks(t, 0.0), ValidationError);
  CHECK_THROWS_AS(find_peaks(t, 1.5), ValidationError);
}

TEST_CASE("bichromatic scan shows the dressed ladder and its minima") {
  const auto s = base_scheme();
  const auto d = symmetric_drive(0.4, 0.7);
  SolverSettings settings;
  const auto trace = scan(s, d, weak_probe(), -2.0, 2.0, 801, settings);
  const auto peaks = find_peaks(trace, 0.05);
  REQUIRE(peaks.positions.size() == 3);
  CHECK(std::abs(peaks.positions[0] + 0.7) < 0.05);
  CHECK(std::abs(peaks.positions[1]) < 0.05);
  CHECK(std::abs(peaks.positions[2] - 0.7) < 0.05);

  const auto minima = transparency_minima(trace, peaks);
  REQUIRE(minima.size() == 2);
  CHECK(minima[0] < 0.0);
  CHECK(minima[1] > 0.0);
  CHECK(std::abs(minima[0] + minima[1]) < 0.02);  // symmetric pair

  // The minima really are minima: the dispersion slope there is positive
  // and a locally refined scan does not find anything deeper nearby.
  for (double m : minima) {
    CHECK(dispersion_slope(s, d, weak_probe(), m, -1.0, settings) > 0.0);
    const auto fine =
        scan(s, d, weak_probe(), m - 0.05, m + 0.05, 101, settings);
    double lowest = 1e300;
    for (double a : fine.absorption) lowest = std::min(lowest, a);
    const size_t coarse_at = static_cast<size_t>(
        std::lround((m - trace.grid.front()) / (trace.grid[1] - trace.grid[0])));
    CHECK(trace.absorption[coarse_at] <= lowest + 5e-4);
  }
}

TEST_CASE("dispersion slope: bare line and symmetry") {
  const auto s = base_scheme();
  BichromaticDrive none;
  SolverSettings settings;
  // Bare Lorentzian: dispersion = -delta_p gamma / 2 / (delta_p^2 + ...),
  // slope at line center is -2 / gamma. The centered difference at the
  // default step h = gamma/1000 carries an h^2 f''' / 6 truncation bias of
  // about 8e-6 here, so the gate sits just above that.
  const double slope0 = dispersion_slope(s, none, weak_probe(), 0.0, -1.0,
                                         settings);
  CHECK(slope0 == doctest::Approx(-2.0).epsilon(1e-5));

  const auto d = symmetric_drive(0.4, 0.7);
  const double left =
      dispersion_slope(s, d, weak_probe(), -0.35, -1.0, settings);
  const double right =
      dispersion_slope(s, d, weak_probe(), 0.35, -1.0, settings);
  CHECK(std::abs(left - right) < 1e-6 * std::max(1.0, std::abs(left)));

  // An explicit step must agree with the default-step result.
  const double explicit_h =
      dispersion_slope(s, none, weak_probe(), 0.0, 1e-3, settings);
  CHECK(std::abs(explicit_h - slope0) < 1e-9);
}

TEST_CASE("gauss_hermite_normal: moments and degenerate cases") {
  for (int n : {1, 3, 7, 15}) {
    const auto nodes = gauss_hermite_normal(n);
    REQUIRE(nodes.size() == static_cast<size_t>(n));
    double w = 0.0, t2 = 0.0, t4 = 0.0;
    for (const auto& [t, wk] : nodes) {
      w += wk;
      t2 += wk * t * t;
      t4 += wk * t * t * t * t;
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
    if (n >= 2) CHECK(t2 == doctest::Approx(0.5).epsilon(1e-12));
    if (n >= 3) CHECK(t4 == doctest::Approx(0.75).epsilon(1e-12));
  }
  CHECK(gauss_hermite_normal(1)[0].first == 0.0);
  CHECK_THROWS_AS(gauss_hermite_normal(0), ValidationError);
}

TEST_CASE("zeeman_average: identity, broadening, and area conservation") {
  std::vector<double> grid;
  for (int i = 0; i <= 1200; ++i) grid.push_back(-6.0 + i * 0.01);

  const SpectrumGenerator gen = [](const std::vector<double>& g) {
    return lorentzian_trace(g);
  };

  ZeemanModel off;
  off.sigma = 0.0;
  const auto plain = zeeman_average(gen, grid, off);
  const auto direct = lorentzian_trace(grid);
  for (size_t i = 0; i < grid.size(); ++i)
    CHECK(plain.absorption[i] == direct.absorption[i]);

  ZeemanModel one;
  one.sigma = 0.4;
  one.n_points = 1;
  const auto single = zeeman_average(gen, grid, one);
  for (size_t i = 0; i < grid.size(); ++i)
    CHECK(single.absorption[i] == direct.absorption[i]);

  ZeemanModel broad;
  broad.sigma = 0.4;
  broad.n_points = 9;
  const auto smeared = zeeman_average(gen, grid, broad);

  // Compare against a dense trapezoid convolution with the Gaussian.
  double worst = 0.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0, wsum = 0.0;
    const double ds = 0.02;
    for (double shift = -2.4; shift <= 2.4; shift += ds) {
      const double x = grid[i] - shift;
      const double w = std::exp(-shift * shift / (2 * 0.4 * 0.4));
      acc += w * 0.25 / (x * x + 0.25);
      wsum += w;
    }
    worst = std::max(worst, std::abs(smeared.absorption[i] - acc / wsum));
  }
  CHECK(worst < 5e-3);  // nine-node quadrature error for these widths

  // Peak drops, area is conserved to the grid's accuracy.
  double peak_direct = 0.0, peak_smeared = 0.0;
  double area_direct = 0.0, area_smeared = 0.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    peak_direct = std::max(peak_direct, direct.absorption[i]);
    peak_smeared = std::max(peak_smeared, smeared.absorption[i]);
    const double w = (i == 0 || i + 1 == grid.size()) ? 0.005 : 0.01;
    area_direct += w * direct.absorption[i];
    area_smeared += w * smeared.absorption[i];
  }
  CHECK(peak_smeared < 0.8 * peak_direct);
  CHECK(std::abs(area_smeared - area_direct) < 0.01 * area_direct);
}

TEST_CASE("transmission: Beer-Lambert against pinned points") {
  SpectrumTrace t;
  t.grid = {0.0, 1.0, 2.0};
  t.absorption = {1.0, 0.5, 0.0};
  t.dispersion = {0.0, 0.0, 0.0};

  const auto full = transmission(t, 0.0);
  for (double v : full) CHECK(v == doctest::Approx(1.0));

  const double od = 0.35667494393873245;  // ln(1 / 0.7)
  const auto seventy = transmission(t, od);
  CHECK(seventy[0] == doctest::Approx(0.70).epsilon(1e-12));
  CHECK(seventy[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(seventy[1] == doctest::Approx(std::exp(-od * 0.5)).epsilon(1e-12));

  CHECK_THROWS_AS(transmission(t, -0.1), ValidationError);
}

TEST_CASE("write_csv emits a parsable header and full-precision rows") {
  SpectrumTrace t;
  t.grid = {-0.5, 0.0, 0.5};
  t.absorption = {0.2, 1.0, 0.2};
  t.dispersion = {0.123456789012345, 0.0, -0.123456789012345};
  std::ostringstream os;
  write_csv(t, os);
  const std::string text = os.str();
  CHECK(text.find("delta_p,absorption,dispersion") != std::string::npos);
  CHECK(text.find("0.123456789012345") != std::string::npos);
  size_t rows = 0;
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 4);  // header + three data lines
}
