#include <algorithm>
#include <cmath>
#include <sstream>

#include "vilab/cli.hpp"

namespace vilab::cli {
namespace {

constexpr double kWidth = 640, kHeight = 420, kMargin = 60;

struct Series {
  const char* name;
  const char* color;
  std::optional<double> ReportRow::*field;
};

}  // namespace

// Log-log plot of the error columns against delta, gamma or h.
std::string render_svg(const StudyReport& report) {
  std::optional<double> ReportRow::*xfield = &ReportRow::h;
  const char* xname = "h";
  auto has = [&](std::optional<double> ReportRow::*f) {
    return std::any_of(report.rows.begin(), report.rows.end(), [&](const ReportRow& r) { return (r.*f).has_value(); });
  };
  if (has(&ReportRow::delta)) {
    xfield = &ReportRow::delta;
    xname = "delta";
  } else if (has(&ReportRow::gamma)) {
    xfield = &ReportRow::gamma;
    xname = "gamma";
  }
  const Series series[] = {{"err_sup", "#1f77b4", &ReportRow::err_sup},
                           {"err_l2", "#ff7f0e", &ReportRow::err_l2},
                           {"err_energy", "#2ca02c", &ReportRow::err_energy},
                           {"violation", "#d62728", &ReportRow::violation}};

  auto usable = [](const std::optional<double>& v) { return v && std::isfinite(*v) && *v > 0.0; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& r : report.rows) {
    if (!usable(r.*xfield)) continue;
    for (const auto& s : series) {
      if (!usable(r.*(s.field))) continue;
      x0 = std::min(x0, std::log10(*(r.*xfield)));
      x1 = std::max(x1, std::log10(*(r.*xfield)));
      y0 = std::min(y0, std::log10(*(r.*(s.field))));
      y1 = std::max(y1, std::log10(*(r.*(s.field))));
    }
  }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\">" << report.study << "</text>\n";
  if (!(x0 <= x1)) {
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\">no positive data</text>\n</svg>\n";
    return svg.str();
  }
  x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);
  auto px = [&](double lx) { return kMargin + (lx - x0) / (x1 - x0) * (kWidth - 2 * kMargin); };
  auto py = [&](double ly) { return kHeight - kMargin - (ly - y0) / (y1 - y0) * (kHeight - 2 * kMargin); };

  svg << "<g stroke=\"#bbb\" font-size=\"11\">\n";
  for (double d = x0; d <= x1; d += 1)
    svg << "<line x1=\"" << px(d) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(d) << "\" y2=\"" << py(y1) << "\"/>"
        << "<text stroke=\"none\" x=\"" << px(d) << "\" y=\"" << py(y0) + 16 << "\" text-anchor=\"middle\">1e" << d
        << "</text>\n";
  for (double d = y0; d <= y1; d += 1)
    svg << "<line x1=\"" << px(x0) << "\" y1=\"" << py(d) << "\" x2=\"" << px(x1) << "\" y2=\"" << py(d) << "\"/>"
        << "<text stroke=\"none\" x=\"" << px(x0) - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d
        << "</text>\n";
  svg << "</g>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">" << xname << "</text>\n";

  int legend = 0;
  for (const auto& s : series) {
    std::ostringstream pts;
    int count = 0;
    for (const auto& r : report.rows) {
      if (!usable(r.*xfield) || !usable(r.*(s.field))) continue;
      pts << px(std::log10(*(r.*xfield))) << ',' << py(std::log10(*(r.*(s.field)))) << ' ';
      ++count;
    }
    if (count == 0) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    svg << "<text x=\"" << kWidth - kMargin << "\" y=\"" << 44 + 14 * legend++ << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
        << s.color << "\">" << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace vilab::cli
