#include "biceit/linear_response.hpp"

#include <cmath>
#include <string>

#include "biceit/banded.hpp"

namespace biceit {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};
constexpr int kMaxTruncation = 1 << 16;

// Absolute convergence floor. a_0 can legitimately sit at round-off (perfect
// transparency); a purely relative criterion would then never trigger.
double a0_floor(const Recurrence& rec) {
  return 1e-14 * rec.omega_p / rec.gamma;
}

bool close_enough(std::complex<double> next, std::complex<double> prev,
                  double rel_tol, double floor) {
  return std::abs(next - prev) <= rel_tol * std::abs(next) + floor;
}

void check_collapse(const Recurrence& rec) {
  if (rec.delta == 0.0 && rec.omega_c2 != 0.0)
    throw ValidationError(
        "delta = 0 with omega_c2 != 0: the harmonic expansion is "
        "degenerate; fold the two components into omega_c1");
}

// The static-drive collapse (delta = 0, single coupling component): the
// source only reaches a_0 and b_{-1}, so that closed 2x2 block is the whole
// problem. Solving it exactly keeps the perfect two-photon resonance
// (gamma21 = 0, delta_p = delta_c) finite, where the generic truncated
// system would carry undetermined spectator harmonics with zero rows.
HarmonicSpectrum static_collapse(const Recurrence& rec) {
  HarmonicSpectrum out;
  out.n_max = 2;
  out.a.assign(5, 0.0);
  out.b.assign(5, 0.0);
  const std::complex<double> s = rec.source();
  if (rec.omega_c1 == 0.0) {
    out.a[2] = s / rec.diag_a(0);
    return out;
  }
  const std::complex<double> da = rec.diag_a(0);
  const std::complex<double> db = rec.diag_b(-1);
  const std::complex<double> det = da * db + 0.25 * rec.omega_c1 * rec.omega_c1;
  if (det == std::complex<double>(0.0))
    throw SolverError("static collapse: singular 2x2 block at delta = 0");
  out.a[2] = s * db / det;
  out.b[1] = 0.5 * kI * rec.omega_c1 * s / det;
  return out;
}

}  // namespace

Recurrence build_recurrence(const AtomicLevelScheme& scheme,
                            const BichromaticDrive& drive,
                            const ProbeField& probe) {
  Recurrence rec;
  rec.gamma = scheme.gamma;
  rec.gamma21 = scheme.gamma21;
  rec.omega_c1 = drive.omega_c1;
  rec.omega_c2 = drive.omega_c2;
  rec.omega_p = probe.omega_p;
  rec.delta = drive.delta;
  rec.delta_p = probe.delta_p;
  rec.delta_c = average_coupling_detuning(drive);
  return rec;
}

HarmonicSpectrum solve_banded(const Recurrence& rec, int n_max) {
  if (n_max < 2)
    throw ValidationError("solve_banded: n_max must be >= 2");
  check_collapse(rec);
  if (rec.delta == 0.0) return static_collapse(rec);

  const int big_n = n_max;
  const int dim = 4 * big_n + 2;
  const auto idx_a = [big_n](int n) { return 2 * (n + big_n); };
  const auto idx_b = [big_n](int n) { return 2 * (n + big_n) + 1; };

  const std::complex<double> c1 = 0.5 * kI * rec.omega_c1;
  const std::complex<double> c2 = 0.5 * kI * rec.omega_c2;

  BandedLU lu(dim, 3, 3);
  std::vector<std::complex<double>> rhs(dim, 0.0);

  for (int n = -big_n; n <= big_n; ++n) {
    lu.add(idx_a(n), idx_a(n), rec.diag_a(n));
    if (n - 1 >= -big_n) lu.add(idx_a(n), idx_b(n - 1), -c1);
    if (n + 1 <= big_n) lu.add(idx_a(n), idx_b(n + 1), -c2);

    lu.add(idx_b(n), idx_b(n), rec.diag_b(n));
    if (n + 1 <= big_n) lu.add(idx_b(n), idx_a(n + 1), -c1);
    if (n - 1 >= -big_n) lu.add(idx_b(n), idx_a(n - 1), -c2);
  }
  rhs[idx_a(0)] = rec.source();

  try {
    lu.factor();
  } catch (const SolverError&) {
    // Name the decoupled harmonic instead of a bare matrix column. The only
    // way the pivot column can vanish is an isolated b row with zero
    // two-photon denominator and no coupling, or a fully switched-off probe
    // line; report in recurrence terms.
    for (int n = -big_n; n <= big_n; ++n) {
      if (std::abs(rec.diag_b(n)) == 0.0 && rec.omega_c1 == 0.0 &&
          rec.omega_c2 == 0.0)
        throw SolverError(
            "solve_banded: singular system, two-photon denominator vanishes "
            "at harmonic n = " +
            std::to_string(n) + " with no coupling field");
    }
    throw;
  }

  std::vector<std::complex<double>> x = rhs;
  lu.solve(x);

  HarmonicSpectrum out;
  out.n_max = big_n;
  out.a.assign(2 * big_n + 1, 0.0);
  out.b.assign(2 * big_n + 1, 0.0);
  for (int n = -big_n; n <= big_n; ++n) {
    out.a[static_cast<size_t>(n + big_n)] = x[idx_a(n)];
    out.b[static_cast<size_t>(n + big_n)] = x[idx_b(n)];
  }

  // Residual of the recurrence, evaluated independently of the LU storage.
  const double source_norm = std::abs(rec.source());
  double res = 0.0;
  for (int n = -big_n; n <= big_n; ++n) {
    const std::complex<double> ra =
        rec.diag_a(n) * out.a_coeff(n) - c1 * out.b_coeff(n - 1) -
        c2 * out.b_coeff(n + 1) - (n == 0 ? rec.source() : 0.0);
    const std::complex<double> rb = rec.diag_b(n) * out.b_coeff(n) -
                                    c1 * out.a_coeff(n + 1) -
                                    c2 * out.a_coeff(n - 1);
    res = std::max(res, std::max(std::abs(ra), std::abs(rb)));
  }
  if (res >= 1e-12 * source_norm)
    throw SolverError("solve_banded: residual " + std::to_string(res) +
                      " exceeds 1e-12 of the source norm " +
                      std::to_string(source_norm));

  return out;
}

namespace {

// Coefficients of the even-harmonic three-term recurrence obtained by
// eliminating the b_n:
//   beta_minus(n) a_{n-2} + alpha(n) a_n + beta_plus(n) a_{n+2} = s delta_n0
struct EvenRecurrence {
  const Recurrence& rec;

  std::complex<double> db(int m) const {
    const std::complex<double> d = rec.diag_b(m);
    if (d == std::complex<double>(0.0))
      throw SolverError(
          "continued fraction: two-photon denominator vanishes at harmonic "
          "m = " +
          std::to_string(m) +
          " (gamma21 = 0 on exact resonance); use the banded method");
    return d;
  }

  std::complex<double> alpha(int n) const {
    std::complex<double> v = rec.diag_a(n);
    if (rec.omega_c1 != 0.0)
      v += 0.25 * rec.omega_c1 * rec.omega_c1 / db(n - 1);
    if (rec.omega_c2 != 0.0)
      v += 0.25 * rec.omega_c2 * rec.omega_c2 / db(n + 1);
    return v;
  }
  std::complex<double> beta_minus(int n) const {
    if (rec.omega_c1 == 0.0 || rec.omega_c2 == 0.0) return 0.0;
    return 0.25 * rec.omega_c1 * rec.omega_c2 / db(n - 1);
  }
  std::complex<double> beta_plus(int n) const {
    if (rec.omega_c1 == 0.0 || rec.omega_c2 == 0.0) return 0.0;
    return 0.25 * rec.omega_c1 * rec.omega_c2 / db(n + 1);
  }
};

// a_0 for truncation depth m (even): harmonics beyond |m| are dropped.
// Ratios R(n) = a_n / a_{n-2} descend from the top, S(n) = a_n / a_{n+2}
// ascend from the bottom; only the decaying solution survives either sweep.
std::complex<double> cf_a0(const EvenRecurrence& er, int m) {
  const Recurrence& rec = er.rec;
  std::complex<double> r2 = 0.0;  // R(2) after the descent
  for (int n = m; n >= 2; n -= 2)
    r2 = -er.beta_minus(n) / (er.alpha(n) + er.beta_plus(n) * r2);
  std::complex<double> s2 = 0.0;  // S(-2) after the ascent
  for (int n = -m; n <= -2; n += 2)
    s2 = -er.beta_plus(n) / (er.alpha(n) + er.beta_minus(n) * s2);
  const std::complex<double> denom =
      er.alpha(0) + er.beta_minus(0) * s2 + er.beta_plus(0) * r2;
  if (denom == std::complex<double>(0.0))
    throw SolverError("continued fraction: zero denominator at a_0");
  return rec.source() / denom;
}

// Full spectrum at fixed depth, for the accepted a_0.
HarmonicSpectrum cf_spectrum(const EvenRecurrence& er, int m,
                             std::complex<double> a0) {
  const Recurrence& rec = er.rec;
  HarmonicSpectrum out;
  out.n_max = m;
  out.a.assign(2 * m + 1, 0.0);
  out.b.assign(2 * m + 1, 0.0);
  out.a[static_cast<size_t>(m)] = a0;

  if (rec.omega_c1 != 0.0 && rec.omega_c2 != 0.0) {
    // Ratio chains, recomputed top-down so a_n = R(n) a_{n-2}.
    std::vector<std::complex<double>> ratio(m + 1, 0.0);
    std::complex<double> r = 0.0;
    for (int n = m; n >= 2; n -= 2) {
      r = -er.beta_minus(n) / (er.alpha(n) + er.beta_plus(n) * r);
      ratio[static_cast<size_t>(n)] = r;
    }
    for (int n = 2; n <= m; n += 2)
      out.a[static_cast<size_t>(n + m)] =
          ratio[static_cast<size_t>(n)] * out.a[static_cast<size_t>(n - 2 + m)];

    std::vector<std::complex<double>> ratio_dn(m + 1, 0.0);
    r = 0.0;
    for (int n = -m; n <= -2; n += 2) {
      r = -er.beta_plus(n) / (er.alpha(n) + er.beta_minus(n) * r);
      ratio_dn[static_cast<size_t>(-n)] = r;
    }
    for (int n = -2; n >= -m; n -= 2)
      out.a[static_cast<size_t>(n + m)] =
          ratio_dn[static_cast<size_t>(-n)] *
          out.a[static_cast<size_t>(n + 2 + m)];
  }

  const std::complex<double> half_i = 0.5 * kI;
  for (int n = -m + 1; n <= m - 1; n += 2) {
    const std::complex<double> num = rec.omega_c1 * out.a_coeff(n + 1) +
                                     rec.omega_c2 * out.a_coeff(n - 1);
    if (num != std::complex<double>(0.0))
      out.b[static_cast<size_t>(n + m)] = half_i * num / er.db(n);
  }
  return out;
}

}  // namespace

HarmonicSpectrum solve_continued_fraction(const Recurrence& rec,
                                          double rel_tol, int start_depth) {
  check_collapse(rec);
  if (!(rel_tol > 0))
    throw ValidationError("solve_continued_fraction: rel_tol must be > 0");

  if (rec.delta == 0.0) return static_collapse(rec);

  const EvenRecurrence er{rec};

  // With a single component the even recurrence has no off-diagonal terms
  // and a_0 follows without iteration.
  if (rec.omega_c1 == 0.0 || rec.omega_c2 == 0.0)
    return cf_spectrum(er, 2, rec.source() / er.alpha(0));

  int m = std::max(4, start_depth);
  if (m % 2 != 0) ++m;

  const double floor = a0_floor(rec);
  std::complex<double> prev = cf_a0(er, m);
  while (true) {
    const int m_next = 2 * m;
    if (m_next > kMaxTruncation)
      throw ConvergenceError(
          "continued fraction: no convergence by depth " + std::to_string(m),
          prev, cf_a0(er, m / 2));
    const std::complex<double> next = cf_a0(er, m_next);
    if (close_enough(next, prev, rel_tol, floor))
      return cf_spectrum(er, m_next, next);
    prev = next;
    m = m_next;
  }
}

int initial_truncation(const BichromaticDrive& drive) {
  if (drive.delta <= 0.0) return 4;
  const double guess =
      4.0 * (1.0 + (drive.omega_c1 + drive.omega_c2) / (2.0 * drive.delta));
  return std::max(4, static_cast<int>(std::ceil(guess)));
}

ProbeResponse probe_response(const AtomicLevelScheme& scheme,
                             const BichromaticDrive& drive,
                             const ProbeField& probe,
                             const SolverSettings& settings) {
  const Recurrence rec = build_recurrence(scheme, drive, probe);

  HarmonicSpectrum spec;
  int truncation = 0;

  if (settings.method == SolveMethod::banded) {
    if (!settings.adaptive) {
      spec = solve_banded(rec, settings.n_max);
      truncation = settings.n_max;
    } else {
      const double floor = a0_floor(rec);
      int n = initial_truncation(drive);
      HarmonicSpectrum prev = solve_banded(rec, n);
      while (true) {
        if (2 * n > kMaxTruncation)
          throw ConvergenceError(
              "probe_response: truncation " + std::to_string(n) +
                  " still not converged",
              prev.a0(), prev.a0());
        HarmonicSpectrum next = solve_banded(rec, 2 * n);
        if (close_enough(next.a0(), prev.a0(), settings.rel_tol, floor)) {
          spec = std::move(next);
          truncation = 2 * n;
          break;
        }
        prev = std::move(next);
        n *= 2;
      }
    }
  } else {
    const int start =
        settings.adaptive ? initial_truncation(drive) : settings.n_max;
    spec = solve_continued_fraction(rec, settings.rel_tol, start);
    truncation = spec.n_max;
  }

  ProbeResponse out;
  out.delta_p = probe.delta_p;
  out.a0 = spec.a0();
  out.absorption = out.a0.imag() * rec.gamma / rec.omega_p;
  out.dispersion = out.a0.real() * rec.gamma / rec.omega_p;
  out.truncation = truncation;
  return out;
}

}  // namespace biceit
