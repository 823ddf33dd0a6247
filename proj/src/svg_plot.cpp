#include "biceit/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "biceit/errors.hpp"

namespace biceit {

namespace {

struct Axis {
  double lo, hi;
  std::vector<double> ticks;
};

// Round limits outward to a tidy tick step (1, 2, 2.5, 5 per decade).
Axis nice_axis(double lo, double hi) {
  if (!(hi > lo)) hi = lo + 1.0;
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 2.5, 5.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  Axis ax;
  ax.lo = std::floor(lo / step) * step;
  ax.hi = std::ceil(hi / step) * step;
  for (double t = ax.lo; t <= ax.hi + 0.5 * step; t += step)
    ax.ticks.push_back(t);
  return ax;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string render_svg_plot(const std::string& title,
                            const std::string& x_label,
                            const std::vector<double>& x,
                            const std::vector<PlotSeries>& series) {
  if (x.size() < 2) throw ValidationError("plot: need at least 2 points");
  for (const auto& s : series)
    if (s.y.size() != x.size())
      throw ValidationError("plot: series \"" + s.label +
                            "\" length mismatch");

  double ylo = 0.0, yhi = 0.0;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.y) {
      if (first) {
        ylo = yhi = v;
        first = false;
      }
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  const Axis xa = nice_axis(x.front(), x.back());
  const Axis ya = nice_axis(ylo, yhi);

  const double W = 800, H = 500;
  const double ml = 70, mr = 20, mt = 40, mb = 55;
  const auto px = [&](double v) {
    return ml + (v - xa.lo) / (xa.hi - xa.lo) * (W - ml - mr);
  };
  const auto py = [&](double v) {
    return H - mb - (v - ya.lo) / (ya.hi - ya.lo) * (H - mt - mb);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << " "
     << H << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-size=\"16\">"
     << title << "</text>\n";

  // frame and grid
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
     << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : xa.ticks) {
    const double X = px(t);
    os << "<line x1=\"" << X << "\" y1=\"" << mt << "\" x2=\"" << X
       << "\" y2=\"" << H - mb << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << X << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  for (double t : ya.ticks) {
    const double Y = py(t);
    os << "<line x1=\"" << ml << "\" y1=\"" << Y << "\" x2=\"" << W - mr
       << "\" y2=\"" << Y << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << Y + 4
       << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\">" << x_label << "</text>\n";

  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"6 4\"";
    os << " points=\"";
    for (size_t i = 0; i < x.size(); ++i) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x[i]), py(s.y[i]));
      os << buf;
    }
    os << "\"/>\n";
  }

  // legend
  double ly = mt + 16;
  for (const auto& s : series) {
    os << "<line x1=\"" << ml + 12 << "\" y1=\"" << ly << "\" x2=\""
       << ml + 44 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"";
    if (s.dashed) os << " stroke-dasharray=\"6 4\"";
    os << "/>\n<text x=\"" << ml + 50 << "\" y=\"" << ly + 4 << "\">"
       << s.label << "</text>\n";
    ly += 18;
  }

  os << "</svg>\n";
  return os.str();
}

}  // namespace biceit
