#include "biceit/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "biceit/linear_response.hpp"

namespace biceit {

std::array<FitParameter*, FitParameters::count> FitParameters::all() {
  return {&omega_c, &delta_c2, &gamma21, &zeeman_sigma, &amplitude, &baseline};
}

std::array<const FitParameter*, FitParameters::count> FitParameters::all()
    const {
  return {&omega_c, &delta_c2, &gamma21, &zeeman_sigma, &amplitude, &baseline};
}

const char* FitParameters::name(int i) {
  static constexpr const char* names[] = {"omega_c",      "delta_c2",
                                          "gamma21",      "zeeman_sigma",
                                          "amplitude",    "baseline"};
  return names[i];
}

namespace {

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_line(int line_no, const std::string& line,
                           const std::string& why) {
  throw IoError("trace line " + std::to_string(line_no) + ": " + why +
                " (got \"" + line + "\")");
}

}  // namespace

ExperimentalTrace load_trace(std::istream& is) {
  ExperimentalTrace trace;
  bool kind_seen = false;
  bool header_seen = false;
  std::string raw;
  int line_no = 0;

  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trimmed(raw);
    if (line.empty()) continue;

    if (line[0] == '#') {
      const auto pos = line.find("kind:");
      if (pos != std::string::npos) {
        const std::string value = trimmed(line.substr(pos + 5));
        if (value == "absorption")
          trace.kind = TraceKind::absorption;
        else if (value == "transmission")
          trace.kind = TraceKind::transmission;
        else
          bad_line(line_no, raw, "unknown kind \"" + value + "\"");
        kind_seen = true;
      }
      continue;
    }

    if (!header_seen) {
      if (line != "delta_p_mhz,signal")
        bad_line(line_no, raw, "expected header \"delta_p_mhz,signal\"");
      header_seen = true;
      continue;
    }

    const auto comma = line.find(',');
    if (comma == std::string::npos)
      bad_line(line_no, raw, "expected two comma-separated values");
    const std::string left = trimmed(line.substr(0, comma));
    const std::string right = trimmed(line.substr(comma + 1));
    double x = 0, y = 0;
    try {
      size_t used = 0;
      x = std::stod(left, &used);
      if (used != left.size()) bad_line(line_no, raw, "junk after detuning");
      y = std::stod(right, &used);
      if (used != right.size()) bad_line(line_no, raw, "junk after signal");
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      bad_line(line_no, raw, "could not parse numbers");
    }
    if (!std::isfinite(x) || !std::isfinite(y))
      bad_line(line_no, raw, "non-finite value");
    if (!trace.grid_mhz.empty() && x <= trace.grid_mhz.back())
      bad_line(line_no, raw, "detunings must be strictly increasing");
    trace.grid_mhz.push_back(x);
    trace.signal.push_back(y);
  }

  if (!header_seen) throw IoError("trace: missing header line");
  if (!kind_seen) throw IoError("trace: missing \"# kind:\" comment line");
  if (trace.grid_mhz.size() < 10)
    throw IoError("trace: need at least 10 data rows, got " +
                  std::to_string(trace.grid_mhz.size()));
  return trace;
}

ExperimentalTrace load_trace_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open trace file: " + path);
  try {
    return load_trace(is);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_trace(const ExperimentalTrace& trace, std::ostream& os) {
  os << "# kind: "
     << (trace.kind == TraceKind::absorption ? "absorption" : "transmission")
     << "\n";
  os << "delta_p_mhz,signal\n";
  char line[80];
  for (size_t i = 0; i < trace.grid_mhz.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", trace.grid_mhz[i],
                  trace.signal[i]);
    os << line;
  }
}

std::vector<double> model_signal(const FitParameters& params,
                                 const std::vector<double>& grid_mhz,
                                 TraceKind kind, const FitContext& ctx) {
  const double g = ctx.gamma_mhz;
  if (!(g > 0)) throw ValidationError("fit context: gamma_mhz must be > 0");

  AtomicLevelScheme scheme;
  scheme.gamma = 1.0;
  scheme.branch_31 = ctx.branch_31;
  scheme.branch_32 = ctx.branch_32;
  scheme.gamma21 = params.gamma21.value / g;

  BichromaticDrive drive;
  drive.omega_c1 = params.omega_c.value / g;
  drive.omega_c2 = params.omega_c.value / g;
  drive.delta = ctx.delta_mhz / g;
  drive.delta_c2 = params.delta_c2.value / g;

  ProbeField probe;
  probe.omega_p = ctx.omega_p;

  const SpectrumGenerator generate =
      [&](const std::vector<double>& pts) -> SpectrumTrace {
    SpectrumTrace part;
    part.grid = pts;
    part.absorption.resize(pts.size());
    part.dispersion.resize(pts.size());
    ProbeField p = probe;
    for (size_t i = 0; i < pts.size(); ++i) {
      p.delta_p = pts[i] / g;
      try {
        const ProbeResponse r = probe_response(scheme, drive, p, ctx.solver);
        part.absorption[i] = r.absorption;
        part.dispersion[i] = r.dispersion;
      } catch (const SolverError& e) {
        throw SolverError("model_signal: solver failed at delta_p = " +
                          std::to_string(pts[i]) + " MHz: " + e.what());
      }
    }
    return part;
  };

  ZeemanModel zeeman;
  zeeman.sigma = params.zeeman_sigma.value;
  zeeman.n_points = ctx.zeeman_points;
  const SpectrumTrace averaged = zeeman_average(generate, grid_mhz, zeeman);

  std::vector<double> out(grid_mhz.size());
  const double amp = params.amplitude.value;
  const double base = params.baseline.value;
  if (kind == TraceKind::absorption) {
    for (size_t i = 0; i < out.size(); ++i)
      out[i] = base + amp * averaged.absorption[i];
  } else {
    for (size_t i = 0; i < out.size(); ++i)
      out[i] =
          base + amp * std::exp(-ctx.optical_depth * averaged.absorption[i]);
  }
  return out;
}

double residual(const FitParameters& params, const ExperimentalTrace& trace,
                const FitContext& ctx) {
  if (trace.grid_mhz.size() != trace.signal.size())
    throw ValidationError("residual: trace arrays disagree in length");
  const std::vector<double> model =
      model_signal(params, trace.grid_mhz, trace.kind, ctx);
  double sse = 0.0;
  for (size_t i = 0; i < model.size(); ++i) {
    const double d = model[i] - trace.signal[i];
    sse += d * d;
  }
  return sse;
}

namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

double clip(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

// Relative coordinate spread of the simplex around its best vertex.
double spread_of(const Simplex& s, int best) {
  double worst = 0.0;
  for (size_t v = 0; v < s.x.size(); ++v) {
    for (size_t j = 0; j < s.x[v].size(); ++j) {
      const double scale = std::max(1.0, std::abs(s.x[best][j]));
      worst = std::max(worst, std::abs(s.x[v][j] - s.x[best][j]) / scale);
    }
  }
  return worst;
}

}  // namespace

FitResult fit(const FitParameters& initial, const ExperimentalTrace& trace,
              const FitContext& ctx, const FitOptions& options) {
  if (options.max_evaluations < 1 || options.restarts < 0)
    throw ValidationError("fit: bad options");

  std::vector<int> free_idx;
  {
    auto params = initial.all();
    for (int i = 0; i < FitParameters::count; ++i) {
      const FitParameter& p = *params[i];
      if (!(p.lower <= p.upper))
        throw ValidationError(std::string("fit: bounds of ") +
                              FitParameters::name(i) + " are inverted");
      if (!(p.value >= p.lower && p.value <= p.upper))
        throw ValidationError(std::string("fit: initial value of ") +
                              FitParameters::name(i) +
                              " lies outside its bounds");
      if (!p.fixed) free_idx.push_back(i);
    }
  }

  FitResult result;
  result.parameters = initial;

  if (free_idx.empty()) {
    result.residual = residual(initial, trace, ctx);
    result.n_evaluations = 1;
    result.converged = true;
    return result;
  }

  const int dim = static_cast<int>(free_idx.size());
  int evals = 0;

  const auto assemble = [&](const std::vector<double>& x) {
    FitParameters p = initial;
    auto slots = p.all();
    for (int j = 0; j < dim; ++j) slots[free_idx[j]]->value = x[j];
    return p;
  };
  const auto objective = [&](std::vector<double>& x) {
    for (int j = 0; j < dim; ++j) {
      const FitParameter& b = *initial.all()[free_idx[j]];
      x[j] = clip(x[j], b.lower, b.upper);
    }
    ++evals;
    return residual(assemble(x), trace, ctx);
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);

  std::vector<double> start(dim);
  for (int j = 0; j < dim; ++j) {
    const FitParameter& p = *initial.all()[free_idx[j]];
    start[j] = clip(p.value, p.lower, p.upper);
  }

  std::vector<double> best_x = start;
  double best_f = std::numeric_limits<double>::infinity();
  bool any_converged = false;

  for (int run = 0; run <= options.restarts; ++run) {
    std::vector<double> x0 = run == 0 ? start : best_x;
    if (run > 0)
      for (double& v : x0) v *= 1.0 + jitter(rng);

    // initial simplex: one vertex per coordinate step
    Simplex s;
    s.x.assign(dim + 1, x0);
    for (int j = 0; j < dim; ++j) {
      double step = 0.05 * std::abs(x0[j]);
      if (step == 0.0) step = 0.02;
      s.x[j + 1][j] += step;
    }
    s.f.resize(dim + 1);
    const int run_budget = options.max_evaluations;
    int run_evals = 0;
    const auto eval = [&](std::vector<double>& x) {
      ++run_evals;
      return objective(x);
    };
    for (int v = 0; v <= dim; ++v) s.f[v] = eval(s.x[v]);

    bool converged = false;
    while (run_evals < run_budget) {
      // order: best, ..., worst
      std::vector<int> order(dim + 1);
      for (int v = 0; v <= dim; ++v) order[v] = v;
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return s.f[a] < s.f[b]; });
      const int best = order[0];
      const int worst = order[dim];
      const int second = order[dim - 1];

      if (spread_of(s, best) < options.spread_tol) {
        converged = true;
        break;
      }

      std::vector<double> centroid(dim, 0.0);
      for (int v = 0; v <= dim; ++v)
        if (v != worst)
          for (int j = 0; j < dim; ++j) centroid[j] += s.x[v][j];
      for (double& c : centroid) c /= dim;

      const auto blend = [&](double coeff) {
        std::vector<double> x(dim);
        for (int j = 0; j < dim; ++j)
          x[j] = centroid[j] + coeff * (centroid[j] - s.x[worst][j]);
        return x;
      };

      std::vector<double> xr = blend(1.0);
      const double fr = eval(xr);
      if (fr < s.f[best]) {
        std::vector<double> xe = blend(2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          s.x[worst] = std::move(xe);
          s.f[worst] = fe;
        } else {
          s.x[worst] = std::move(xr);
          s.f[worst] = fr;
        }
      } else if (fr < s.f[second]) {
        s.x[worst] = std::move(xr);
        s.f[worst] = fr;
      } else {
        std::vector<double> xc = blend(fr < s.f[worst] ? 0.5 : -0.5);
        const double fc = eval(xc);
        if (fc < std::min(fr, s.f[worst])) {
          s.x[worst] = std::move(xc);
          s.f[worst] = fc;
        } else {
          // shrink toward the best vertex
          for (int v = 0; v <= dim; ++v) {
            if (v == best) continue;
            for (int j = 0; j < dim; ++j)
              s.x[v][j] = s.x[best][j] + 0.5 * (s.x[v][j] - s.x[best][j]);
            s.f[v] = eval(s.x[v]);
          }
        }
      }
    }

    int run_best = 0;
    for (int v = 1; v <= dim; ++v)
      if (s.f[v] < s.f[run_best]) run_best = v;
    if (s.f[run_best] < best_f) {
      best_f = s.f[run_best];
      best_x = s.x[run_best];
    }
    any_converged = any_converged || converged;
  }

  result.parameters = assemble(best_x);
  result.residual = best_f;
  result.n_evaluations = evals;
  result.converged = any_converged;
  return result;
}

}  // namespace biceit
