#include "smooth/metrics/spectrum.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "smooth/core/errors.h"
#include "smooth/core/io.h"

namespace smooth {
namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw ContractError("fft size must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Twiddles from the angle directly rather than by repeated
        // multiplication, which drifts at larger sizes.
        std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
        std::complex<double> u = a[start + k];
        std::complex<double> v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

Spectrum dft_magnitudes(std::span<const double> signal, double fs) {
  if (signal.size() < 2) throw ContractError("spectrum needs >= 2 samples");
  if (!(fs > 0.0)) throw ContractError("sampling frequency must be > 0");
  const std::size_t n = next_power_of_two(signal.size());
  std::vector<std::complex<double>> data(n);
  for (std::size_t i = 0; i < signal.size(); ++i) data[i] = signal[i];
  fft_inplace(data);
  Spectrum out;
  out.fft_size = n;
  for (std::size_t i = 0; i <= n / 2; ++i) {
    out.magnitudes.push_back(std::abs(data[i]));
    out.frequencies.push_back(static_cast<double>(i) * fs /
                              static_cast<double>(n));
  }
  return out;
}

double smoothness(const Spectrum& spectrum, double fs) {
  const std::size_t bins = spectrum.magnitudes.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 1; i <= bins; ++i) {
    sum += spectrum.magnitudes[i] * spectrum.frequencies[i];
  }
  return 2.0 / (static_cast<double>(bins) * fs) * sum;
}

double smoothness(std::span<const double> signal, double fs) {
  // Running mean: exact for a constant signal, so it scores exactly zero.
  double mean = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    mean += (signal[i] - mean) / static_cast<double>(i + 1);
  }
  std::vector<double> centered(signal.begin(), signal.end());
  for (double& x : centered) x -= mean;
  return smoothness(dft_magnitudes(centered, fs), fs);
}

std::vector<double> ActionTrace::column(std::size_t dim) const {
  std::vector<double> out;
  out.reserve(actions.size());
  for (const Vec& a : actions) out.push_back(a.at(dim));
  return out;
}

void ActionTrace::validate() const {
  if (!(fs > 0.0)) throw ContractError("trace sampling frequency must be > 0");
  if (actions.size() < kMinTraceSteps) {
    throw ContractError("trace needs at least 8 steps to be scored");
  }
  const std::size_t d = actions[0].size();
  if (d == 0) throw ContractError("trace has no action dimensions");
  for (const Vec& a : actions) {
    if (a.size() != d) throw ContractError("trace rows differ in width");
    for (double x : a) {
      if (!std::isfinite(x)) throw ContractError("trace has non-finite action");
    }
  }
}

SmoothnessReport smoothness_score(const ActionTrace& trace) {
  return smoothness_score(std::vector<ActionTrace>{trace});
}

SmoothnessReport smoothness_score(const std::vector<ActionTrace>& traces,
                                  const std::vector<double>& returns) {
  if (traces.empty()) throw ContractError("no traces to score");
  if (!returns.empty() && returns.size() != traces.size()) {
    throw ContractError("need one return per trace");
  }
  SmoothnessReport report;
  const std::size_t d = traces[0].dims();
  report.per_dim.assign(d, 0.0);
  for (const ActionTrace& t : traces) {
    t.validate();
    if (t.dims() != d) throw ContractError("traces differ in action width");
    double episode = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      double sm = smoothness(t.column(k), t.fs);
      report.per_dim[k] += sm;
      episode += sm;
    }
    report.per_episode.push_back(episode / static_cast<double>(d));
  }
  for (double& v : report.per_dim) v /= static_cast<double>(traces.size());
  report.episodes = traces.size();
  report.aggregate = mean(report.per_episode);
  report.aggregate_std = stddev(report.per_episode);
  report.return_mean = mean(returns);
  report.return_std = stddev(returns);
  return report;
}

std::string traces_to_csv(const std::vector<ActionTrace>& traces) {
  std::ostringstream out;
  const std::size_t d = traces.empty() ? 0 : traces[0].dims();
  out << "episode,step";
  for (std::size_t k = 0; k < d; ++k) out << ",a_" << k;
  out << '\n';
  for (const ActionTrace& t : traces) {
    for (std::size_t s = 0; s < t.steps(); ++s) {
      out << t.episode << ',' << s;
      for (double x : t.actions[s]) out << ',' << format_double(x);
      out << '\n';
    }
  }
  return out.str();
}

std::vector<ActionTrace> traces_from_csv(const std::string& text, double fs) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("episode,step", 0) != 0) {
    throw Error("trace CSV must start with an episode,step header");
  }
  std::vector<ActionTrace> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      std::string cell = line.substr(pos, comma - pos);
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error("trace CSV line " + std::to_string(line_no) +
                    ": bad number '" + cell + "'");
      }
      pos = comma + 1;
    }
    if (cells.size() < 3) {
      throw Error("trace CSV line " + std::to_string(line_no) +
                  ": expected episode, step and actions");
    }
    int episode = static_cast<int>(cells[0]);
    if (out.empty() || out.back().episode != episode) {
      out.push_back(ActionTrace{episode, fs, {}});
    }
    out.back().actions.emplace_back(cells.begin() + 2, cells.end());
  }
  return out;
}

}  // namespace smooth
