#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "biceit/linear_response.hpp"
#include "biceit/model.hpp"

namespace biceit {

struct SpectrumTrace {
  std::vector<double> grid;        // probe detunings
  std::vector<double> absorption;  // Im(a_0) gamma / omega_p
  std::vector<double> dispersion;  // Re(a_0) gamma / omega_p
};

struct PeakSet {
  std::vector<double> positions;  // ascending, parabolically refined
  std::vector<double> heights;
  std::vector<double> prominences;
};

// Inhomogeneous broadening of the ground-state splitting, modeled as a
// normal distribution of rigid shifts of the response in probe detuning.
struct ZeemanModel {
  double sigma = 0.0;  // standard deviation of the shift
  int n_points = 7;    // Gauss-Hermite quadrature nodes
};

// Probe response over a uniform detuning grid. probe.delta_p is ignored;
// everything else in probe (notably omega_p) applies to every point.
SpectrumTrace scan(const AtomicLevelScheme& scheme,
                   const BichromaticDrive& drive, const ProbeField& probe,
                   double lo, double hi, int n_points,
                   const SolverSettings& settings);

// Interior local maxima of the absorption, plateau-aware, keeping peaks
// whose prominence reaches threshold times the global maximum height.
// Positions and heights are refined with a three-point parabola.
PeakSet find_peaks(const SpectrumTrace& trace, double threshold = 0.05);

std::vector<double> peak_separations(const PeakSet& peaks);

// Positions of the absorption minima between consecutive peaks.
std::vector<double> transparency_minima(const SpectrumTrace& trace,
                                        const PeakSet& peaks);

// Centered finite difference of the dispersion at a given detuning.
// h <= 0 selects the default step gamma / 1000.
double dispersion_slope(const AtomicLevelScheme& scheme,
                        const BichromaticDrive& drive, const ProbeField& probe,
                        double at_detuning, double h,
                        const SolverSettings& settings);

// Gauss-Hermite nodes and weights (weight function e^{-t^2}), with the
// weights normalized to sum to 1, so sum w_k f(sqrt(2) sigma t_k) averages
// f over a zero-mean normal distribution of width sigma.
std::vector<std::pair<double, double>> gauss_hermite_normal(int n);

using SpectrumGenerator =
    std::function<SpectrumTrace(const std::vector<double>& grid)>;

// Quadrature average of rigidly shifted responses. sigma = 0 or a single
// node returns the unshifted trace exactly.
SpectrumTrace zeeman_average(const SpectrumGenerator& generate,
                             const std::vector<double>& grid,
                             const ZeemanModel& model);

// Beer-Lambert transmission through a medium of given optical depth.
std::vector<double> transmission(const SpectrumTrace& trace,
                                 double optical_depth);

void write_csv(const SpectrumTrace& trace, std::ostream& os);

}  // namespace biceit
