#include "biceit/model.hpp"

#include <cmath>
#include <sstream>

namespace biceit {

double average_coupling_detuning(const BichromaticDrive& drive) {
  return drive.delta_c2 - drive.delta;
}

std::vector<double> dressed_ladder(double delta, int m_max) {
  if (m_max < 0) throw ValidationError("dressed_ladder: m_max must be >= 0");
  if (delta < 0) throw ValidationError("dressed_ladder: delta must be >= 0");
  std::vector<double> rungs;
  rungs.reserve(2 * m_max + 1);
  for (int m = -m_max; m <= m_max; ++m) rungs.push_back(m * delta);
  return rungs;
}

namespace {

std::string describe(const char* field, double value) {
  std::ostringstream os;
  os << field << " = " << value;
  return os.str();
}

void require_finite(std::vector<std::string>& issues, const char* field,
                    double value) {
  if (!std::isfinite(value))
    issues.push_back(describe(field, value) + " is not finite");
}

}  // namespace

ValidatedConfig validate(const AtomicLevelScheme& scheme,
                         const BichromaticDrive& drive,
                         const ProbeField& probe,
                         const SolverSettings& solver, Unit unit) {
  std::vector<std::string> issues;

  require_finite(issues, "scheme.gamma", scheme.gamma);
  require_finite(issues, "scheme.branch_31", scheme.branch_31);
  require_finite(issues, "scheme.branch_32", scheme.branch_32);
  require_finite(issues, "scheme.gamma21", scheme.gamma21);
  require_finite(issues, "drive.omega_c1", drive.omega_c1);
  require_finite(issues, "drive.omega_c2", drive.omega_c2);
  require_finite(issues, "drive.delta", drive.delta);
  require_finite(issues, "drive.delta_c2", drive.delta_c2);
  require_finite(issues, "probe.omega_p", probe.omega_p);
  require_finite(issues, "probe.delta_p", probe.delta_p);

  if (!(scheme.gamma > 0))
    issues.push_back(describe("scheme.gamma", scheme.gamma) +
                     ", must be positive");
  if (scheme.branch_31 < 0)
    issues.push_back(describe("scheme.branch_31", scheme.branch_31) +
                     ", must be >= 0");
  if (scheme.branch_32 < 0)
    issues.push_back(describe("scheme.branch_32", scheme.branch_32) +
                     ", must be >= 0");
  if (scheme.branch_31 + scheme.branch_32 > 1 + 1e-12)
    issues.push_back("scheme.branch_31 + scheme.branch_32 = " +
                     std::to_string(scheme.branch_31 + scheme.branch_32) +
                     ", must not exceed 1");
  if (scheme.gamma21 < 0)
    issues.push_back(describe("scheme.gamma21", scheme.gamma21) +
                     ", must be >= 0");

  if (drive.omega_c1 < 0)
    issues.push_back(describe("drive.omega_c1", drive.omega_c1) +
                     ", must be >= 0");
  if (drive.omega_c2 < 0)
    issues.push_back(describe("drive.omega_c2", drive.omega_c2) +
                     ", must be >= 0");
  if (drive.delta < 0)
    issues.push_back(describe("drive.delta", drive.delta) +
                     ", must be >= 0");
  if (drive.delta == 0 && drive.omega_c2 != 0)
    issues.push_back(
        "drive.delta = 0 requires drive.omega_c2 = 0 (monochromatic "
        "collapse); got omega_c2 = " +
        std::to_string(drive.omega_c2));

  if (!(probe.omega_p > 0))
    issues.push_back(describe("probe.omega_p", probe.omega_p) +
                     ", must be positive");

  if (solver.n_max < 2)
    issues.push_back("solver.n_max = " + std::to_string(solver.n_max) +
                     ", must be >= 2");
  if (!(solver.rel_tol > 0) || !(solver.rel_tol < 1e-2))
    issues.push_back(describe("solver.rel_tol", solver.rel_tol) +
                     ", must lie in (0, 1e-2)");

  if (!issues.empty()) throw ValidationError(std::move(issues));

  ValidatedConfig out;
  const double scale = scheme.gamma;
  out.scheme.gamma = 1.0;
  out.scheme.branch_31 = scheme.branch_31;
  out.scheme.branch_32 = scheme.branch_32;
  out.scheme.gamma21 = scheme.gamma21 / scale;
  out.drive.omega_c1 = drive.omega_c1 / scale;
  out.drive.omega_c2 = drive.omega_c2 / scale;
  out.drive.delta = drive.delta / scale;
  out.drive.delta_c2 = drive.delta_c2 / scale;
  out.probe.omega_p = probe.omega_p / scale;
  out.probe.delta_p = probe.delta_p / scale;
  out.solver = solver;
  out.gamma_scale = scale;
  out.input_unit = unit;

  if (out.probe.omega_p > 0.2)
    out.warnings.push_back(
        "probe.omega_p exceeds 0.2 gamma: outside the weak-probe regime, "
        "linear response is unreliable");
  if (scheme.branch_31 + scheme.branch_32 < 1 - 1e-12)
    out.warnings.push_back(
        "branching fractions sum to less than 1: population leaks out of "
        "the three-level system");

  return out;
}

}  // namespace biceit
