#include "smooth/harness/svg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smooth/core/errors.h"

namespace smooth {
namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string color(std::size_t i) {
  return kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_svg(const LinePlot& plot, int width, int height) {
  const double left = 70, right = 150, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  auto extend = [&](const std::vector<double>& xs,
                    const std::vector<double>& ys) {
    for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
      x0 = std::min(x0, xs[i]);
      x1 = std::max(x1, xs[i]);
      y0 = std::min(y0, ys[i]);
      y1 = std::max(y1, ys[i]);
    }
  };
  for (const Series& s : plot.series) extend(s.x, s.y);
  for (const Band& b : plot.bands) {
    extend(b.x, b.lo);
    extend(b.x, b.hi);
  }
  if (!std::isfinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
    << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
    << "font-size=\"15\">" << xml_escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
    o << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(top + ph + 16)
      << "\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
    o << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(fy) + 4)
      << "\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
  }
  o << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << height - 10
    << "\" text-anchor=\"middle\">" << xml_escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << fmt(top + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(plot.y_label)
    << "</text>\n";

  for (std::size_t i = 0; i < plot.bands.size(); ++i) {
    const Band& b = plot.bands[i];
    std::size_t n = std::min({b.x.size(), b.lo.size(), b.hi.size()});
    if (n == 0) continue;
    o << "<polygon fill=\"" << color(i) << "\" fill-opacity=\"0.2\" "
      << "stroke=\"none\" points=\"";
    for (std::size_t k = 0; k < n; ++k) {
      o << fmt(px(b.x[k])) << ',' << fmt(py(b.hi[k])) << ' ';
    }
    for (std::size_t k = n; k-- > 0;) {
      o << fmt(px(b.x[k])) << ',' << fmt(py(b.lo[k])) << ' ';
    }
    o << "\"/>\n";
  }
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const Series& s = plot.series[i];
    o << "<polyline fill=\"none\" stroke=\"" << color(i)
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      o << fmt(px(s.x[k])) << ',' << fmt(py(s.y[k])) << ' ';
    }
    o << "\"/>\n";
    double ly = top + 14 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << fmt(left + pw + 12) << "\" y1=\"" << fmt(ly - 4)
      << "\" x2=\"" << fmt(left + pw + 32) << "\" y2=\"" << fmt(ly - 4)
      << "\" stroke=\"" << color(i) << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fmt(left + pw + 38) << "\" y=\"" << fmt(ly) << "\">"
      << xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace smooth
