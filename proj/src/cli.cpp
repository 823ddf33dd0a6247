#include "biceit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "biceit/linear_response.hpp"
#include "biceit/oracle.hpp"
#include "biceit/svg_plot.hpp"

namespace biceit {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void expect_keys(const json& obj, const std::string& section,
                 std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }))
      throw ValidationError("config: unknown key \"" + section + "." +
                            it.key() + "\"");
  }
}

double get_num(const json& o, const char* key, double dflt) {
  if (!o.contains(key)) return dflt;
  if (!o.at(key).is_number())
    throw ValidationError(std::string("config: ") + key +
                          " must be a number");
  return o.at(key).get<double>();
}

int get_int(const json& o, const char* key, int dflt) {
  if (!o.contains(key)) return dflt;
  if (!o.at(key).is_number_integer())
    throw ValidationError(std::string("config: ") + key +
                          " must be an integer");
  return o.at(key).get<int>();
}

bool get_bool(const json& o, const char* key, bool dflt) {
  if (!o.contains(key)) return dflt;
  if (!o.at(key).is_boolean())
    throw ValidationError(std::string("config: ") + key +
                          " must be a boolean");
  return o.at(key).get<bool>();
}

Unit parse_units(const std::string& s) {
  std::string v = s;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "gamma") return Unit::gamma;
  if (v == "mhz" || v == "megahertz") return Unit::megahertz;
  throw ValidationError("config: units must be \"gamma\" or \"mhz\", got \"" +
                        s + "\"");
}

SolveMethod parse_method(const std::string& s) {
  if (s == "banded") return SolveMethod::banded;
  if (s == "cf" || s == "continued_fraction")
    return SolveMethod::continued_fraction;
  throw ValidationError("config: method must be \"banded\" or \"cf\", got \"" +
                        s + "\"");
}

FitParameter parse_fit_parameter(const json& o, const std::string& where,
                                 double default_value) {
  expect_keys(o, where, {"value", "lower", "upper", "fixed"});
  FitParameter p;
  p.value = get_num(o, "value", default_value);
  p.lower = get_num(o, "lower", p.lower);
  p.upper = get_num(o, "upper", p.upper);
  p.fixed = get_bool(o, "fixed", false);
  return p;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

fs::path prepare_out_dir(const std::string& out_dir) {
  fs::path dir(out_dir.empty() ? "out" : out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
  return dir;
}

// Exit-code policy shared by every subcommand.
template <class Body>
int guarded(Body&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 2;
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text,
                       const std::string& where) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    throw IoError(where + ": JSON parse error: " + e.what());
  }
  if (!root.is_object())
    throw ValidationError(where + ": top level must be an object");
  expect_keys(root, "<root>",
              {"units", "scheme", "drive", "probe", "solver", "scan",
               "zeeman", "optical_depth", "peaks", "oracle", "fit"});

  RunConfig cfg;
  if (root.contains("units")) cfg.units = parse_units(root.at("units"));

  if (root.contains("scheme")) {
    const json& o = root.at("scheme");
    expect_keys(o, "scheme", {"gamma", "branch_31", "branch_32", "gamma21"});
    cfg.scheme.gamma = get_num(o, "gamma", cfg.scheme.gamma);
    cfg.scheme.branch_31 = get_num(o, "branch_31", cfg.scheme.branch_31);
    cfg.scheme.branch_32 = get_num(o, "branch_32", cfg.scheme.branch_32);
    cfg.scheme.gamma21 = get_num(o, "gamma21", cfg.scheme.gamma21);
  }
  if (root.contains("drive")) {
    const json& o = root.at("drive");
    expect_keys(o, "drive", {"omega_c1", "omega_c2", "delta", "delta_c2"});
    cfg.drive.omega_c1 = get_num(o, "omega_c1", cfg.drive.omega_c1);
    cfg.drive.omega_c2 = get_num(o, "omega_c2", cfg.drive.omega_c2);
    cfg.drive.delta = get_num(o, "delta", cfg.drive.delta);
    cfg.drive.delta_c2 = get_num(o, "delta_c2", cfg.drive.delta_c2);
  }
  if (root.contains("probe")) {
    const json& o = root.at("probe");
    expect_keys(o, "probe", {"omega_p", "delta_p"});
    cfg.probe.omega_p = get_num(o, "omega_p", cfg.probe.omega_p);
    cfg.probe.delta_p = get_num(o, "delta_p", cfg.probe.delta_p);
  }
  if (root.contains("solver")) {
    const json& o = root.at("solver");
    expect_keys(o, "solver", {"method", "n_max", "rel_tol", "adaptive"});
    if (o.contains("method"))
      cfg.solver.method = parse_method(o.at("method"));
    cfg.solver.n_max = get_int(o, "n_max", cfg.solver.n_max);
    cfg.solver.rel_tol = get_num(o, "rel_tol", cfg.solver.rel_tol);
    cfg.solver.adaptive = get_bool(o, "adaptive", cfg.solver.adaptive);
  }
  if (root.contains("scan")) {
    const json& o = root.at("scan");
    expect_keys(o, "scan", {"min", "max", "points"});
    cfg.scan.min = get_num(o, "min", cfg.scan.min);
    cfg.scan.max = get_num(o, "max", cfg.scan.max);
    cfg.scan.points = get_int(o, "points", cfg.scan.points);
  }
  if (root.contains("zeeman")) {
    const json& o = root.at("zeeman");
    expect_keys(o, "zeeman", {"sigma", "n_points"});
    cfg.zeeman.sigma = get_num(o, "sigma", cfg.zeeman.sigma);
    cfg.zeeman.n_points = get_int(o, "n_points", cfg.zeeman.n_points);
  }
  cfg.optical_depth = get_num(root, "optical_depth", cfg.optical_depth);
  if (root.contains("peaks")) {
    const json& o = root.at("peaks");
    expect_keys(o, "peaks", {"prominence_threshold"});
    cfg.peak_threshold =
        get_num(o, "prominence_threshold", cfg.peak_threshold);
  }
  if (root.contains("oracle")) {
    const json& o = root.at("oracle");
    expect_keys(o, "oracle", {"detunings", "steady_tol", "dt"});
    if (o.contains("detunings")) {
      if (!o.at("detunings").is_array())
        throw ValidationError("config: oracle.detunings must be an array");
      for (const auto& v : o.at("detunings"))
        cfg.oracle.detunings.push_back(v.get<double>());
    }
    cfg.oracle.steady_tol = get_num(o, "steady_tol", cfg.oracle.steady_tol);
    cfg.oracle.dt = get_num(o, "dt", cfg.oracle.dt);
  }
  if (root.contains("fit")) {
    const json& o = root.at("fit");
    expect_keys(o, "fit",
                {"omega_c", "delta_c2", "gamma21", "zeeman_sigma",
                 "amplitude", "baseline"});
    cfg.has_fit = true;
    cfg.fit.omega_c = o.contains("omega_c")
                          ? parse_fit_parameter(o.at("omega_c"), "fit.omega_c",
                                                cfg.drive.omega_c1)
                          : FitParameter{cfg.drive.omega_c1};
    cfg.fit.delta_c2 =
        o.contains("delta_c2")
            ? parse_fit_parameter(o.at("delta_c2"), "fit.delta_c2",
                                  cfg.drive.delta_c2)
            : FitParameter{cfg.drive.delta_c2};
    cfg.fit.gamma21 = o.contains("gamma21")
                          ? parse_fit_parameter(o.at("gamma21"), "fit.gamma21",
                                                cfg.scheme.gamma21)
                          : FitParameter{cfg.scheme.gamma21};
    cfg.fit.zeeman_sigma =
        o.contains("zeeman_sigma")
            ? parse_fit_parameter(o.at("zeeman_sigma"), "fit.zeeman_sigma",
                                  cfg.zeeman.sigma)
            : FitParameter{cfg.zeeman.sigma};
    cfg.fit.amplitude = o.contains("amplitude")
                            ? parse_fit_parameter(o.at("amplitude"),
                                                  "fit.amplitude", 1.0)
                            : FitParameter{1.0};
    cfg.fit.baseline = o.contains("baseline")
                           ? parse_fit_parameter(o.at("baseline"),
                                                 "fit.baseline", 0.0)
                           : FitParameter{0.0};
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str(), path);
}

namespace {

struct NormalizedRun {
  ValidatedConfig v;
  double scale;  // input units per gamma
};

NormalizedRun normalize(const RunConfig& cfg) {
  ValidatedConfig v =
      validate(cfg.scheme, cfg.drive, cfg.probe, cfg.solver, cfg.units);
  for (const auto& w : v.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  return {v, v.gamma_scale};
}

// Scan + optional Zeeman averaging, grid in input units.
SpectrumTrace compute_trace(const RunConfig& cfg, const NormalizedRun& run) {
  if (cfg.scan.points < 2)
    throw ValidationError("config: scan.points must be >= 2");
  if (!(cfg.scan.max > cfg.scan.min))
    throw ValidationError("config: scan.max must exceed scan.min");

  std::vector<double> grid(cfg.scan.points);
  const double h = (cfg.scan.max - cfg.scan.min) / (cfg.scan.points - 1);
  for (int i = 0; i < cfg.scan.points; ++i) grid[i] = cfg.scan.min + i * h;

  const double scale = run.scale;
  const SpectrumGenerator generate =
      [&](const std::vector<double>& pts) -> SpectrumTrace {
    SpectrumTrace part;
    part.grid = pts;
    part.absorption.resize(pts.size());
    part.dispersion.resize(pts.size());
    ProbeField p = run.v.probe;
    for (size_t i = 0; i < pts.size(); ++i) {
      p.delta_p = pts[i] / scale;
      const ProbeResponse r =
          probe_response(run.v.scheme, run.v.drive, p, run.v.solver);
      part.absorption[i] = r.absorption;
      part.dispersion[i] = r.dispersion;
    }
    return part;
  };

  ZeemanModel zeeman = cfg.zeeman;  // sigma in input units, like the grid
  return zeeman_average(generate, grid, zeeman);
}

json trace_summary(const RunConfig& cfg, const NormalizedRun& run,
                   const SpectrumTrace& trace) {
  const PeakSet peaks = find_peaks(trace, cfg.peak_threshold);
  const auto seps = peak_separations(peaks);
  const auto minima = transparency_minima(trace, peaks);

  json j;
  j["units"] = cfg.units == Unit::megahertz ? "mhz" : "gamma";
  j["gamma"] = cfg.scheme.gamma;
  j["n_points"] = trace.grid.size();
  j["max_absorption"] =
      *std::max_element(trace.absorption.begin(), trace.absorption.end());
  j["peaks"] = {{"positions", peaks.positions},
                {"heights", peaks.heights},
                {"prominences", peaks.prominences},
                {"separations", seps}};
  j["transparency_minima"] = minima;

  std::vector<double> slopes;
  for (double m : minima) {
    ProbeField p = run.v.probe;
    const double s = dispersion_slope(run.v.scheme, run.v.drive, p,
                                      m / run.scale, 0.0, run.v.solver);
    slopes.push_back(s / run.scale);  // per input unit
  }
  j["dispersion_slopes_at_minima"] = slopes;
  j["optical_depth"] = cfg.optical_depth;
  return j;
}

std::string transmission_csv(const SpectrumTrace& trace, double od) {
  std::ostringstream os;
  os << "delta_p,transmission\n";
  const auto t = transmission(trace, od);
  char line[80];
  for (size_t i = 0; i < trace.grid.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", trace.grid[i], t[i]);
    os << line;
  }
  return os.str();
}

}  // namespace

int cmd_spectrum(const RunConfig& config, const std::string& out_dir,
                 bool plot) {
  return guarded([&]() {
    const NormalizedRun run = normalize(config);
    const fs::path dir = prepare_out_dir(out_dir);

    const SpectrumTrace trace = compute_trace(config, run);

    {
      std::ostringstream os;
      write_csv(trace, os);
      write_text_file(dir / "spectrum.csv", os.str());
    }
    write_text_file(dir / "transmission.csv",
                    transmission_csv(trace, config.optical_depth));

    const json summary = trace_summary(config, run, trace);
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");

    if (config.units == Unit::megahertz) {
      // measurement-format copy of the absorption, for the fit pipeline
      ExperimentalTrace synth;
      synth.grid_mhz = trace.grid;
      synth.signal = trace.absorption;
      synth.kind = TraceKind::absorption;
      std::ostringstream os;
      write_trace(synth, os);
      write_text_file(dir / "signal.csv", os.str());
    }

    if (plot) {
      const std::string unit_label =
          config.units == Unit::megahertz ? "MHz" : "gamma units";
      std::vector<PlotSeries> series{
          {"absorption", trace.absorption, "#b2411f", false},
          {"dispersion", trace.dispersion, "#1f6fb2", true}};
      write_text_file(dir / "spectrum.svg",
                      render_svg_plot("probe response",
                                      "probe detuning (" + unit_label + ")",
                                      trace.grid, series));
    }

    std::printf("spectrum: %d points -> %s\n", config.scan.points,
                (dir / "spectrum.csv").string().c_str());
    const auto& pk = summary.at("peaks").at("positions");
    std::printf("peaks: %zu at", pk.size());
    for (const auto& p : pk) std::printf(" %.4g", p.get<double>());
    std::printf("\n");
    return 0;
  });
}

int cmd_oracle_check(const RunConfig& config,
                     const std::vector<double>& detunings,
                     const std::string& out_dir) {
  return guarded([&]() {
    const std::vector<double>& pts =
        detunings.empty() ? config.oracle.detunings : detunings;
    if (pts.empty())
      throw ValidationError(
          "oracle check: no detunings given (config oracle.detunings or "
          "--dp)");
    if (pts.size() > 32)
      throw ValidationError("oracle check: at most 32 detunings, got " +
                            std::to_string(pts.size()));

    const NormalizedRun run = normalize(config);
    const fs::path dir = prepare_out_dir(out_dir);

    IntegrationSettings integ;
    integ.steady_tol = config.oracle.steady_tol;
    // time steps scale inversely to rates when converting into gamma units
    integ.dt = config.oracle.dt > 0 ? config.oracle.dt * run.scale : 0.0;

    constexpr double tolerance = 1e-3;
    json report;
    report["tolerance"] = tolerance;
    report["probe_nonlinearity_flag"] = run.v.probe.omega_p > 0.05;
    if (run.v.probe.omega_p > 0.05)
      report["note"] =
          "omega_p is not deep in the weak-probe regime; deviations beyond "
          "the tolerance may reflect probe nonlinearity, not solver error";
    report["points"] = json::array();

    double max_dev = 0.0;
    for (double dp_input : pts) {
      ProbeField p = run.v.probe;
      p.delta_p = dp_input / run.scale;

      const ProbeResponse fl =
          probe_response(run.v.scheme, run.v.drive, p, run.v.solver);

      DensityMatrix rho0 = DensityMatrix::Zero();
      rho0(0, 0) = 1.0;
      const PeriodicSteadyState steady = integrate_to_periodic_steady_state(
          rho0, run.v.scheme, run.v.drive, p, integ);
      const std::complex<double> a0 = extract_harmonic(steady, 3, 1, 0);

      const double dev = std::abs(fl.a0 - a0) /
                         std::max(std::abs(fl.a0), 1e-300);
      max_dev = std::max(max_dev, dev);

      json point;
      point["delta_p"] = dp_input;
      point["floquet_a0"] = {fl.a0.real(), fl.a0.imag()};
      point["oracle_a0"] = {a0.real(), a0.imag()};
      point["rel_dev"] = dev;
      point["periods"] = steady.periods_elapsed;
      report["points"].push_back(point);

      std::printf("delta_p %+10.4g  floquet (%+.6e, %+.6e)  oracle "
                  "(%+.6e, %+.6e)  dev %.3e\n",
                  dp_input, fl.a0.real(), fl.a0.imag(), a0.real(), a0.imag(),
                  dev);
    }

    report["max_rel_dev"] = max_dev;
    const bool pass = max_dev < tolerance;
    report["pass"] = pass;
    write_text_file(dir / "oracle_report.json", report.dump(2) + "\n");
    std::printf("oracle check: max deviation %.3e (%s)\n", max_dev,
                pass ? "pass" : "FAIL");
    return pass ? 0 : 2;
  });
}

int cmd_fit(const RunConfig& config, const std::string& trace_path,
            const std::string& out_dir, std::uint64_t seed) {
  return guarded([&]() {
    if (config.units != Unit::megahertz)
      throw ValidationError(
          "fit: traces are recorded in MHz, so the config must declare "
          "units = \"mhz\"");

    const ExperimentalTrace trace = load_trace_file(trace_path);
    const NormalizedRun run = normalize(config);
    const fs::path dir = prepare_out_dir(out_dir);

    FitContext ctx;
    ctx.gamma_mhz = config.scheme.gamma;
    ctx.delta_mhz = config.drive.delta;
    ctx.branch_31 = config.scheme.branch_31;
    ctx.branch_32 = config.scheme.branch_32;
    ctx.omega_p = run.v.probe.omega_p;
    ctx.optical_depth = config.optical_depth;
    ctx.zeeman_points = config.zeeman.n_points;
    ctx.solver = config.solver;

    FitParameters initial;
    if (config.has_fit) {
      initial = config.fit;
    } else {
      initial.omega_c.value = config.drive.omega_c1;
      initial.delta_c2.value = config.drive.delta_c2;
      initial.gamma21.value = config.scheme.gamma21;
      initial.zeeman_sigma.value = config.zeeman.sigma;
      initial.amplitude.value = 1.0;
      initial.baseline.value = 0.0;
    }

    FitOptions options;
    options.seed = seed;

    const FitResult result = fit(initial, trace, ctx, options);

    json j;
    j["trace"] = trace_path;
    j["kind"] = trace.kind == TraceKind::absorption ? "absorption"
                                                    : "transmission";
    j["n_samples"] = trace.grid_mhz.size();
    j["parameters"] = json::object();
    {
      auto values = result.parameters.all();
      auto bounds = initial.all();
      for (int i = 0; i < FitParameters::count; ++i) {
        json p;
        p["value"] = values[i]->value;
        p["fixed"] = bounds[i]->fixed;
        if (std::isfinite(bounds[i]->lower)) p["lower"] = bounds[i]->lower;
        if (std::isfinite(bounds[i]->upper)) p["upper"] = bounds[i]->upper;
        j["parameters"][FitParameters::name(i)] = p;
      }
    }
    j["residual"] = result.residual;
    j["n_evaluations"] = result.n_evaluations;
    j["converged"] = result.converged;
    j["settings"] = {{"seed", seed},
                     {"restarts", options.restarts},
                     {"max_evaluations", options.max_evaluations},
                     {"spread_tol", options.spread_tol},
                     {"zeeman_points", ctx.zeeman_points},
                     {"gamma_mhz", ctx.gamma_mhz},
                     {"delta_mhz", ctx.delta_mhz},
                     {"omega_p", ctx.omega_p},
                     {"optical_depth", ctx.optical_depth},
                     {"method", config.solver.method == SolveMethod::banded
                                    ? "banded"
                                    : "cf"},
                     {"rel_tol", config.solver.rel_tol}};
    write_text_file(dir / "fit.json", j.dump(2) + "\n");

    const std::vector<double> model = model_signal(
        result.parameters, trace.grid_mhz, trace.kind, ctx);
    {
      std::ostringstream os;
      os << "delta_p_mhz,data,model\n";
      char line[120];
      for (size_t i = 0; i < trace.grid_mhz.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n",
                      trace.grid_mhz[i], trace.signal[i], model[i]);
        os << line;
      }
      write_text_file(dir / "overlay.csv", os.str());
    }

    std::printf("fit: residual %.6e after %d evaluations (%s)\n",
                result.residual, result.n_evaluations,
                result.converged ? "converged" : "not converged");
    auto values = result.parameters.all();
    for (int i = 0; i < FitParameters::count; ++i)
      std::printf("  %-13s %.6g%s\n", FitParameters::name(i),
                  values[i]->value, initial.all()[i]->fixed ? " (fixed)" : "");
    return 0;
  });
}

int cmd_sweep(const RunConfig& config, const std::string& parameter,
              const std::vector<double>& values, const std::string& out_dir) {
  return guarded([&]() {
    static const std::vector<std::string> allowed{"omega_c", "delta",
                                                  "delta_c2", "gamma21"};
    if (std::find(allowed.begin(), allowed.end(), parameter) == allowed.end())
      throw ValidationError(
          "sweep: parameter must be one of omega_c, delta, delta_c2, "
          "gamma21; got \"" +
          parameter + "\"");
    if (values.empty()) throw ValidationError("sweep: no values given");

    const fs::path dir = prepare_out_dir(out_dir);

    json manifest;
    manifest["parameter"] = parameter;
    manifest["entries"] = json::array();

    int exit_code = 0;
    for (size_t k = 0; k < values.size(); ++k) {
      RunConfig patched = config;
      if (parameter == "omega_c") {
        patched.drive.omega_c1 = values[k];
        patched.drive.omega_c2 = values[k];
      } else if (parameter == "delta") {
        patched.drive.delta = values[k];
      } else if (parameter == "delta_c2") {
        patched.drive.delta_c2 = values[k];
      } else {
        patched.scheme.gamma21 = values[k];
      }

      char name[48];
      std::snprintf(name, sizeof name, "sweep_%02zu.csv", k);

      try {
        const NormalizedRun run = normalize(patched);
        const SpectrumTrace trace = compute_trace(patched, run);
        const PeakSet peaks = find_peaks(trace, patched.peak_threshold);

        std::ostringstream os;
        write_csv(trace, os);
        write_text_file(dir / name, os.str());

        json entry;
        entry["value"] = values[k];
        entry["file"] = name;
        entry["n_peaks"] = peaks.positions.size();
        entry["peak_positions"] = peaks.positions;
        entry["separations"] = peak_separations(peaks);
        manifest["entries"].push_back(entry);
      } catch (const Error& e) {
        json entry;
        entry["value"] = values[k];
        entry["error"] = e.what();
        manifest["entries"].push_back(entry);
        manifest["aborted"] = true;
        std::fprintf(stderr, "sweep aborted at %s = %g: %s\n",
                     parameter.c_str(), values[k], e.what());
        exit_code = dynamic_cast<const ValidationError*>(&e)   ? 1
                    : dynamic_cast<const IoError*>(&e)         ? 3
                                                               : 2;
        break;
      }
    }

    write_text_file(dir / "index.json", manifest.dump(2) + "\n");
    if (exit_code == 0)
      std::printf("sweep: %zu traces -> %s\n", values.size(),
                  (dir / "index.json").string().c_str());
    return exit_code;
  });
}

namespace {

std::vector<double> parse_value_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size())
        throw ValidationError("bad number in value list: \"" + item + "\"");
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("bad number in value list: \"" + item + "\"");
    }
  }
  return values;
}

}  // namespace

}  // namespace biceit

#include "CLI11.hpp"

namespace biceit {

int run_cli(int argc, char** argv) {
  CLI::App app{"weak-probe spectra of a bichromatically driven three-level "
               "atom"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", units_override, method_override;
  bool plot = false;
  std::uint64_t seed = 0;
  std::string trace_path, parameter, values_csv;
  std::vector<double> dp_list;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--units", units_override,
                    "override the config's unit declaration (gamma|mhz)");
    sub->add_option("--method", method_override,
                    "override the solver method (banded|cf)");
  };

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "scan the probe and write spectrum/summary files");
  add_common(spectrum);
  spectrum->add_flag("--plot", plot, "also render spectrum.svg");

  CLI::App* oracle = app.add_subcommand(
      "oracle-check",
      "compare the harmonic solver against time-domain integration");
  add_common(oracle);
  oracle->add_option("--dp", dp_list,
                     "probe detunings to check (overrides the config list)");

  CLI::App* fitcmd =
      app.add_subcommand("fit", "fit a measured trace (MHz units)");
  add_common(fitcmd);
  fitcmd->add_option("--trace", trace_path, "CSV trace to fit")->required();
  fitcmd->add_option("--seed", seed, "RNG seed for fit restarts");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "rerun the scan over a list of parameter values");
  add_common(sweep);
  sweep->add_option("--parameter", parameter,
                    "omega_c | delta | delta_c2 | gamma21")
      ->required();
  sweep->add_option("--values", values_csv, "comma-separated values")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  return guarded([&]() {
    RunConfig cfg = load_config(config_path);
    if (!units_override.empty()) cfg.units = parse_units(units_override);
    if (!method_override.empty())
      cfg.solver.method = parse_method(method_override);

    if (spectrum->parsed()) return cmd_spectrum(cfg, out_dir, plot);
    if (oracle->parsed()) return cmd_oracle_check(cfg, dp_list, out_dir);
    if (fitcmd->parsed()) return cmd_fit(cfg, trace_path, out_dir, seed);
    if (sweep->parsed())
      return cmd_sweep(cfg, parameter, parse_value_list(values_csv), out_dir);
    return 1;
  });
}

}  // namespace biceit
