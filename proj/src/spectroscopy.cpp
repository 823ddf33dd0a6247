#include "biceit/spectroscopy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace biceit {

SpectrumTrace scan(const AtomicLevelScheme& scheme,
                   const BichromaticDrive& drive, const ProbeField& probe,
                   double lo, double hi, int n_points,
                   const SolverSettings& settings) {
  if (n_points < 2) throw ValidationError("scan: need at least 2 points");
  if (!(hi > lo)) throw ValidationError("scan: need hi > lo");

  SpectrumTrace trace;
  trace.grid.resize(n_points);
  trace.absorption.resize(n_points);
  trace.dispersion.resize(n_points);
  const double h = (hi - lo) / (n_points - 1);
  for (int i = 0; i < n_points; ++i)
    trace.grid[i] = lo + i * h;

  ProbeField p = probe;
  for (int i = 0; i < n_points; ++i) {
    p.delta_p = trace.grid[i];
    try {
      const ProbeResponse r = probe_response(scheme, drive, p, settings);
      trace.absorption[i] = r.absorption;
      trace.dispersion[i] = r.dispersion;
    } catch (const SolverError& e) {
      throw SolverError("scan: at delta_p = " + std::to_string(p.delta_p) +
                        ": " + e.what());
    }
  }
  return trace;
}

namespace {

struct RawPeak {
  int index;       // representative grid index (plateau midpoint)
  int left_edge;   // first index of the plateau
  int right_edge;  // last index of the plateau
};

// Interior maxima, flat tops allowed; boundary points never qualify.
std::vector<RawPeak> local_maxima(const std::vector<double>& y) {
  std::vector<RawPeak> out;
  const int n = static_cast<int>(y.size());
  int i = 1;
  while (i < n - 1) {
    if (y[i - 1] < y[i]) {
      int ahead = i + 1;
      while (ahead < n - 1 && y[ahead] == y[i]) ++ahead;
      if (y[ahead] < y[i]) {
        out.push_back({(i + ahead - 1) / 2, i, ahead - 1});
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return out;
}

// Prominence: drop from the peak to the higher of the two key saddles. On
// each side, walk until the trace rises above the peak height (or ends);
// the minimum seen on that stretch is the side's base.
double prominence_of(const std::vector<double>& y, const RawPeak& p) {
  const int n = static_cast<int>(y.size());
  const double h = y[p.index];

  double left_min = h;
  for (int i = p.left_edge - 1; i >= 0; --i) {
    if (y[i] > h) break;
    left_min = std::min(left_min, y[i]);
  }
  double right_min = h;
  for (int i = p.right_edge + 1; i < n; ++i) {
    if (y[i] > h) break;
    right_min = std::min(right_min, y[i]);
  }
  return h - std::max(left_min, right_min);
}

// Parabola through three points on a uniform grid; offset is clamped to
// half a cell. Returns {position, value}.
std::pair<double, double> refine(const std::vector<double>& x,
                                 const std::vector<double>& y, int i,
                                 double sign) {
  const double ym = sign * y[i - 1];
  const double y0 = sign * y[i];
  const double yp = sign * y[i + 1];
  const double denom = ym - 2.0 * y0 + yp;
  if (!(denom < 0.0)) return {x[i], y[i]};  // flat or non-concave: keep
  double off = 0.5 * (ym - yp) / denom;
  off = std::clamp(off, -0.5, 0.5);
  const double h = x[i + 1] - x[i];
  const double value = y0 + 0.25 * (yp - ym) * off;
  return {x[i] + off * h, sign * value};
}

}  // namespace

PeakSet find_peaks(const SpectrumTrace& trace, double threshold) {
  if (trace.grid.size() != trace.absorption.size())
    throw ValidationError("find_peaks: grid/absorption size mismatch");
  if (trace.grid.size() < 3)
    throw ValidationError("find_peaks: need at least 3 grid points");
  if (!(threshold > 0.0) || threshold > 1.0)
    throw ValidationError("find_peaks: threshold must lie in (0, 1]");
  PeakSet peaks;

  const auto& y = trace.absorption;
  const double global_max = *std::max_element(y.begin(), y.end());
  const double cut = threshold * global_max;

  for (const RawPeak& p : local_maxima(y)) {
    const double prom = prominence_of(y, p);
    if (prom < cut) continue;
    const auto [pos, height] = refine(trace.grid, y, p.index, 1.0);
    peaks.positions.push_back(pos);
    peaks.heights.push_back(height);
    peaks.prominences.push_back(prom);
  }
  return peaks;
}

std::vector<double> peak_separations(const PeakSet& peaks) {
  std::vector<double> seps;
  for (size_t i = 1; i < peaks.positions.size(); ++i)
    seps.push_back(peaks.positions[i] - peaks.positions[i - 1]);
  return seps;
}

std::vector<double> transparency_minima(const SpectrumTrace& trace,
                                        const PeakSet& peaks) {
  std::vector<double> minima;
  const auto& x = trace.grid;
  const auto& y = trace.absorption;
  const int n = static_cast<int>(x.size());

  for (size_t k = 0; k + 1 < peaks.positions.size(); ++k) {
    // grid window strictly between the two peak positions
    int lo = static_cast<int>(
        std::upper_bound(x.begin(), x.end(), peaks.positions[k]) - x.begin());
    int hi = static_cast<int>(
        std::lower_bound(x.begin(), x.end(), peaks.positions[k + 1]) -
        x.begin() - 1);
    lo = std::clamp(lo, 1, n - 2);
    hi = std::clamp(hi, 1, n - 2);
    if (hi < lo) continue;

    int best = lo;
    for (int i = lo + 1; i <= hi; ++i)
      if (y[i] < y[best]) best = i;
    minima.push_back(refine(x, y, best, -1.0).first);
  }
  return minima;
}

double dispersion_slope(const AtomicLevelScheme& scheme,
                        const BichromaticDrive& drive, const ProbeField& probe,
                        double at_detuning, double h,
                        const SolverSettings& settings) {
  if (h <= 0) h = scheme.gamma / 1000.0;
  ProbeField p = probe;
  p.delta_p = at_detuning + h;
  const double up = probe_response(scheme, drive, p, settings).dispersion;
  p.delta_p = at_detuning - h;
  const double dn = probe_response(scheme, drive, p, settings).dispersion;
  return (up - dn) / (2.0 * h);
}

std::vector<std::pair<double, double>> gauss_hermite_normal(int n) {
  if (n < 1) throw ValidationError("gauss_hermite_normal: need n >= 1");
  if (n == 1) return {{0.0, 1.0}};

  // Golub-Welsch on the Hermite Jacobi matrix: off-diagonals sqrt(k/2).
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  if (es.info() != Eigen::Success)
    throw SolverError("gauss_hermite_normal: eigensolver failed");

  std::vector<std::pair<double, double>> nodes(n);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    nodes[k] = {es.eigenvalues()(k), w};
    total += w;
  }
  for (auto& [t, w] : nodes) w /= total;  // exact normalization
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

SpectrumTrace zeeman_average(const SpectrumGenerator& generate,
                             const std::vector<double>& grid,
                             const ZeemanModel& model) {
  if (model.sigma < 0)
    throw ValidationError("zeeman_average: sigma must be >= 0");
  if (model.n_points < 1)
    throw ValidationError("zeeman_average: n_points must be >= 1");
  if (model.sigma == 0.0 || model.n_points == 1) return generate(grid);

  const auto nodes = gauss_hermite_normal(model.n_points);

  SpectrumTrace out;
  out.grid = grid;
  out.absorption.assign(grid.size(), 0.0);
  out.dispersion.assign(grid.size(), 0.0);

  std::vector<double> shifted(grid.size());
  for (const auto& [t, w] : nodes) {
    const double shift = std::sqrt(2.0) * model.sigma * t;
    for (size_t i = 0; i < grid.size(); ++i) shifted[i] = grid[i] - shift;
    const SpectrumTrace part = generate(shifted);
    if (part.absorption.size() != grid.size())
      throw SolverError("zeeman_average: generator returned a wrong size");
    for (size_t i = 0; i < grid.size(); ++i) {
      out.absorption[i] += w * part.absorption[i];
      out.dispersion[i] += w * part.dispersion[i];
    }
  }
  return out;
}

std::vector<double> transmission(const SpectrumTrace& trace,
                                 double optical_depth) {
  if (optical_depth < 0)
    throw ValidationError("transmission: optical_depth must be >= 0");
  std::vector<double> t(trace.absorption.size());
  for (size_t i = 0; i < t.size(); ++i)
    t[i] = std::exp(-optical_depth * trace.absorption[i]);
  return t;
}

void write_csv(const SpectrumTrace& trace, std::ostream& os) {
  os << "delta_p,absorption,dispersion\n";
  char line[128];
  for (size_t i = 0; i < trace.grid.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", trace.grid[i],
                  trace.absorption[i], trace.dispersion[i]);
    os << line;
  }
}

}  // namespace biceit
