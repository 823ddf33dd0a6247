#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "biceit/model.hpp"
#include "biceit/spectroscopy.hpp"

namespace biceit {

enum class TraceKind { absorption, transmission };

// Measured (or synthesized) spectrum: probe detunings in MHz against a
// dimensionless signal, either scaled absorption or transmission.
struct ExperimentalTrace {
  std::vector<double> grid_mhz;
  std::vector<double> signal;
  TraceKind kind = TraceKind::absorption;
};

// CSV with a "# kind: absorption|transmission" comment line and the header
// "delta_p_mhz,signal". Parse errors carry the 1-based line number.
ExperimentalTrace load_trace(std::istream& is);
ExperimentalTrace load_trace_file(const std::string& path);
void write_trace(const ExperimentalTrace& trace, std::ostream& os);

struct FitParameter {
  double value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool fixed = false;
};

// The free knobs of the line-shape model. Frequencies in MHz; the
// component splitting delta is set by hardware and is never fitted.
struct FitParameters {
  FitParameter omega_c;       // shared Rabi frequency of both components
  FitParameter delta_c2;      // red-component detuning
  FitParameter gamma21;       // ground-coherence decay
  FitParameter zeeman_sigma;  // inhomogeneous shift spread
  FitParameter amplitude;     // signal scale
  FitParameter baseline;      // signal offset

  static constexpr int count = 6;
  std::array<FitParameter*, count> all();
  std::array<const FitParameter*, count> all() const;
  static const char* name(int i);
};

// Everything the model needs that is not fitted.
struct FitContext {
  double gamma_mhz = 6.0;    // natural linewidth in MHz
  double delta_mhz = 20.0;   // half the component separation, MHz
  double branch_31 = 0.5;
  double branch_32 = 0.5;
  double omega_p = 0.1;      // probe Rabi frequency in units of gamma
  double optical_depth = 0.35667494393873245;  // peak absorption ~30%
  int zeeman_points = 7;
  SolverSettings solver;
};

// Model signal on an arbitrary MHz grid for one parameter vector.
std::vector<double> model_signal(const FitParameters& params,
                                 const std::vector<double>& grid_mhz,
                                 TraceKind kind, const FitContext& ctx);

// Sum of squared residuals between the model and the trace.
double residual(const FitParameters& params, const ExperimentalTrace& trace,
                const FitContext& ctx);

struct FitOptions {
  double spread_tol = 1e-8;  // relative simplex spread at convergence
  int max_evaluations = 2000;  // per descent
  int restarts = 3;
  std::uint64_t seed = 0;
};

struct FitResult {
  FitParameters parameters;
  double residual = 0.0;
  int n_evaluations = 0;
  bool converged = false;
};

// Bounded Nelder-Mead descent with seeded restarts from perturbed optima.
// Deterministic for a given seed. All-fixed parameter sets are evaluated
// once and returned unchanged.
FitResult fit(const FitParameters& initial, const ExperimentalTrace& trace,
              const FitContext& ctx, const FitOptions& options = {});

}  // namespace biceit
