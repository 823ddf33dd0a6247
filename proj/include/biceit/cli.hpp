#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biceit/fitting.hpp"
#include "biceit/model.hpp"
#include "biceit/spectroscopy.hpp"

namespace biceit {

struct ScanRange {
  double min = -3.0;
  double max = 3.0;
  int points = 801;
};

struct OracleCheckSettings {
  std::vector<double> detunings;  // input units; at most 32
  double steady_tol = 1e-12;
  double dt = 0.0;  // <= 0: automatic
};

// One experiment description, straight from a JSON file. All frequencies
// are in the declared unit (gamma multiples or MHz).
struct RunConfig {
  Unit units = Unit::gamma;
  AtomicLevelScheme scheme;
  BichromaticDrive drive;
  ProbeField probe;
  SolverSettings solver;
  ScanRange scan;
  ZeemanModel zeeman;
  double optical_depth = 0.35667494393873245;
  double peak_threshold = 0.05;
  OracleCheckSettings oracle;
  FitParameters fit;
  bool has_fit = false;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& where);

// Subcommands. Each returns a process exit code: 0 success, 1 invalid
// input, 2 solver failure, 3 I/O failure. They throw nothing; errors are
// printed to stderr.
int cmd_spectrum(const RunConfig& config, const std::string& out_dir,
                 bool plot);
int cmd_oracle_check(const RunConfig& config,
                     const std::vector<double>& detunings,
                     const std::string& out_dir);
int cmd_fit(const RunConfig& config, const std::string& trace_path,
            const std::string& out_dir, std::uint64_t seed);
int cmd_sweep(const RunConfig& config, const std::string& parameter,
              const std::vector<double>& values, const std::string& out_dir);

int run_cli(int argc, char** argv);

}  // namespace biceit
