#ifndef SMOOTH_HARNESS_SVG_H_
#define SMOOTH_HARNESS_SVG_H_

#include <string>
#include <vector>

namespace smooth {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Shaded region between lo and hi.
struct Band {
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Band> bands;
};

// Standalone SVG document. Bands are drawn under the series and take the
// color of the series with the same index.
std::string render_svg(const LinePlot& plot, int width = 720,
                       int height = 420);

std::string xml_escape(const std::string& text);

}  // namespace smooth

#endif  // SMOOTH_HARNESS_SVG_H_
