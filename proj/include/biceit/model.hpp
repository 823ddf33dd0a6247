#pragma once

#include <string>
#include <vector>

#include "biceit/errors.hpp"

namespace biceit {

// Unit system of a parameter set. Internally everything runs in units of the
// excited-state decay rate; `megahertz` only tags how the numbers came in and
// how results should go back out.
enum class Unit { gamma, megahertz };

// Three-level Lambda scheme: two ground states |1>, |2> and one excited
// state |3>. The probe couples 1-3, the coupling field 2-3.
struct AtomicLevelScheme {
  double gamma = 1.0;      // total decay rate of |3>
  double branch_31 = 0.5;  // branching fraction |3> -> |1>
  double branch_32 = 0.5;  // branching fraction |3> -> |2>
  double gamma21 = 0.01;   // decay rate of the ground-state coherence
};

// Two-component coupling field. Component 1 sits at delta above the average
// coupling frequency, component 2 at delta below; delta_c2 is the detuning
// of component 2 from the 2-3 resonance. The symmetric arrangement used
// throughout has omega_c1 == omega_c2 and delta_c2 == delta, which centers
// the pair on resonance.
struct BichromaticDrive {
  double omega_c1 = 0.0;  // Rabi frequency of the blue component
  double omega_c2 = 0.0;  // Rabi frequency of the red component
  double delta = 0.0;     // half the frequency separation of the pair
  double delta_c2 = 0.0;  // detuning of the red component
};

struct ProbeField {
  double omega_p = 0.1;  // probe Rabi frequency, must stay weak
  double delta_p = 0.0;  // probe detuning from the 1-3 resonance
};

enum class SolveMethod { banded, continued_fraction };

struct SolverSettings {
  SolveMethod method = SolveMethod::banded;
  int n_max = 4;          // harmonic truncation order (used when !adaptive)
  double rel_tol = 1e-10; // convergence target for adaptive refinement
  bool adaptive = true;
};

// Detuning of the average coupling frequency: delta_c = delta_c2 - delta.
double average_coupling_detuning(const BichromaticDrive& drive);

// Quasi-energy ladder positions {m * delta : m = -m_max .. m_max}, sorted.
// The dressed states of the bichromatic pair repeat at this spacing, so
// probe resonances are expected at these offsets.
std::vector<double> dressed_ladder(double delta, int m_max);

// Parameter set after validation, with every rate and detuning divided by
// scheme.gamma. gamma_scale keeps the original gamma so outputs can be
// converted back to the input unit.
struct ValidatedConfig {
  AtomicLevelScheme scheme;
  BichromaticDrive drive;
  ProbeField probe;
  SolverSettings solver;
  double gamma_scale = 1.0;
  Unit input_unit = Unit::gamma;
  std::vector<std::string> warnings;
};

// Checks every field and throws ValidationError listing all violations at
// once. delta == 0 is only allowed in the monochromatic collapse, i.e. with
// omega_c2 == 0. Normalization is idempotent: validating an already
// normalized set changes nothing.
ValidatedConfig validate(const AtomicLevelScheme& scheme,
                         const BichromaticDrive& drive,
                         const ProbeField& probe,
                         const SolverSettings& solver,
                         Unit unit = Unit::gamma);

}  // namespace biceit
