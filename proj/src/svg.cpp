#include "sharpkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sharpkit/common.hpp"

namespace sharpkit::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range nice_range(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (lo == hi) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

std::vector<double> ticks_for(const Range& r, int count) {
  std::vector<double> t;
  for (int i = 0; i <= count; ++i) {
    t.push_back(r.lo + (r.hi - r.lo) * i / count);
  }
  return t;
}

}  // namespace

std::string render_line_chart(const Chart& chart) {
  const int W = chart.width;
  const int H = chart.height;
  const double ml = 72, mr = 24, mt = 40, mb = 52;  // margins
  const double pw = W - ml - mr;
  const double ph = H - mt - mb;

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const Series& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      double lo = s.y[i], hi = s.y[i];
      if (i < s.y_err.size()) {
        lo -= s.y_err[i];
        hi += s.y_err[i];
      }
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, hi);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  const Range xr = nice_range(xmin, xmax);
  const Range yr = nice_range(ymin, ymax);

  auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"15\">" << escape(chart.title) << "</text>\n";

  // axes + ticks
  out << "<g stroke=\"#333\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(ml + pw)
      << "\" y2=\"" << num(mt + ph) << "\"/>\n";
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml)
      << "\" y2=\"" << num(mt + ph) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double t : ticks_for(xr, 5)) {
    out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(px(t))
        << "\" y2=\"" << num(mt + ph + 4) << "\" stroke=\"#333\"/>";
    out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(mt + ph + 16)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : ticks_for(yr, 5)) {
    out << "<line x1=\"" << num(ml - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(ml)
        << "\" y2=\"" << num(py(t)) << "\" stroke=\"#333\"/>";
    out << "<text x=\"" << num(ml - 7) << "\" y=\"" << num(py(t) + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  out << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(H - 12)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(chart.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << num(mt + ph / 2) << ")\">" << escape(chart.y_label) << "</text>\n";
  out << "</g>\n";

  // series
  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const Series& s = chart.series[si];
    const char* color = kPalette[si % kPaletteSize];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\""
        << pts.str() << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.y_err.size(); ++i) {
      if (!std::isfinite(s.y_err[i]) || s.y_err[i] <= 0) continue;
      out << "<line x1=\"" << num(px(s.x[i])) << "\" y1=\"" << num(py(s.y[i] - s.y_err[i]))
          << "\" x2=\"" << num(px(s.x[i])) << "\" y2=\"" << num(py(s.y[i] + s.y_err[i]))
          << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
    }
    if (s.x.size() <= 64) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
            << "\" r=\"2.4\" fill=\"" << color << "\"/>\n";
      }
    }
  }

  // legend
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = mt + 8;
  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const char* color = kPalette[si % kPaletteSize];
    out << "<line x1=\"" << num(ml + pw - 150) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(ml + pw - 126) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>";
    out << "<text x=\"" << num(ml + pw - 120) << "\" y=\"" << num(ly + 4) << "\">"
        << escape(chart.series[si].name) << "</text>\n";
    ly += 18;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

void write_line_chart(const std::string& path, const Chart& chart) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << render_line_chart(chart);
}

std::string render_bar_chart(const BarChart& chart) {
  const int W = chart.width;
  const int H = chart.height;
  const double ml = 72, mr = 24, mt = 40, mb = 64;
  const double pw = W - ml - mr;
  const double ph = H - mt - mb;

  double ymin = 0.0;
  double ymax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < chart.values.size(); ++i) {
    double hi = chart.values[i];
    if (i < chart.errors.size()) hi += chart.errors[i];
    ymax = std::max(ymax, hi);
    ymin = std::min(ymin, chart.values[i]);
  }
  if (!std::isfinite(ymax)) ymax = 1.0;
  const Range yr = nice_range(std::min(0.0, ymin), ymax);
  auto py = [&](double y) { return mt + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"15\">" << escape(chart.title) << "</text>\n";
  out << "<g stroke=\"#333\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(ml + pw)
      << "\" y2=\"" << num(mt + ph) << "\"/>\n";
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml)
      << "\" y2=\"" << num(mt + ph) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double t : ticks_for(yr, 5)) {
    out << "<text x=\"" << num(ml - 7) << "\" y=\"" << num(py(t) + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  out << "<text x=\"16\" y=\"" << num(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << num(mt + ph / 2) << ")\">" << escape(chart.y_label) << "</text>\n";
  out << "</g>\n";

  const std::size_t nbars = chart.values.size();
  const double slot = pw / std::max<std::size_t>(1, nbars);
  const double bw = slot * 0.6;
  for (std::size_t i = 0; i < nbars; ++i) {
    const char* color = kPalette[i % kPaletteSize];
    const double x = ml + slot * i + (slot - bw) / 2;
    const double y0 = py(std::max(0.0, yr.lo));
    const double y1 = py(chart.values[i]);
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(std::min(y0, y1)) << "\" width=\""
        << num(bw) << "\" height=\"" << num(std::abs(y0 - y1)) << "\" fill=\"" << color
        << "\" fill-opacity=\"0.85\"/>\n";
    if (i < chart.errors.size() && chart.errors[i] > 0) {
      const double cx = x + bw / 2;
      out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(chart.values[i] - chart.errors[i]))
          << "\" x2=\"" << num(cx) << "\" y2=\"" << num(py(chart.values[i] + chart.errors[i]))
          << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    }
    out << "<text x=\"" << num(x + bw / 2) << "\" y=\"" << num(mt + ph + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(i < chart.labels.size() ? chart.labels[i] : "") << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_bar_chart(const std::string& path, const BarChart& chart) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << render_bar_chart(chart);
}

void write_panel_svg(const std::string& path, const std::vector<std::string>& panels,
                     int panel_width, int panel_height) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  const int W = panel_width;
  const int H = panel_height * static_cast<int>(panels.size());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    out << "<g transform=\"translate(0," << panel_height * static_cast<int>(i) << ")\">\n";
    // strip the outer <svg ...> wrapper of the panel
    const std::string& p = panels[i];
    const auto open_end = p.find(">\n");
    const auto close = p.rfind("</svg>");
    if (open_end != std::string::npos && close != std::string::npos) {
      out << p.substr(open_end + 2, close - open_end - 2);
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace sharpkit::svg
