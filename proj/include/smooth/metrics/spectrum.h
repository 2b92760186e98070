#ifndef SMOOTH_METRICS_SPECTRUM_H_
#define SMOOTH_METRICS_SPECTRUM_H_

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "smooth/envs/environment.h"

namespace smooth {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data);

std::size_t next_power_of_two(std::size_t n);

// One-sided amplitude spectrum of a real signal zero-padded to a power of
// two N. Bins 0..N/2; bin i has frequency i * fs / N and magnitude |X_i|.
struct Spectrum {
  std::vector<double> magnitudes;
  std::vector<double> frequencies;
  std::size_t fft_size = 0;
};

// Throws ContractError for fewer than two samples or fs <= 0.
Spectrum dft_magnitudes(std::span<const double> signal, double fs);

// 2 / (n fs) * sum_{i=1..n} M_i f_i over the n = N/2 non-DC bins.
double smoothness(const Spectrum& spectrum, double fs);
// Scores the signal minus its mean. Without that, zero padding turns a
// constant offset into a step and the offset leaks into the non-DC bins.
// For power-of-two lengths only bin 0 changes.
double smoothness(std::span<const double> signal, double fs);

// Executed actions of one episode, steps x action_dim.
struct ActionTrace {
  int episode = 0;
  double fs = 0.0;
  std::vector<Vec> actions;

  std::size_t steps() const { return actions.size(); }
  std::size_t dims() const { return actions.empty() ? 0 : actions[0].size(); }
  std::vector<double> column(std::size_t dim) const;
  // Throws ContractError unless fs > 0, steps >= 8, rows share one width and
  // every entry is finite.
  void validate() const;
};

inline constexpr std::size_t kMinTraceSteps = 8;

struct SmoothnessReport {
  // Mean over episodes of each dimension's score.
  std::vector<double> per_dim;
  // Per-episode mean over dims.
  std::vector<double> per_episode;
  // Mean of per_episode.
  double aggregate = 0.0;
  double aggregate_std = 0.0;
  std::size_t episodes = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
};

SmoothnessReport smoothness_score(const ActionTrace& trace);
// Scores every trace; returns may be empty or one per trace.
SmoothnessReport smoothness_score(const std::vector<ActionTrace>& traces,
                                  const std::vector<double>& returns = {});

// CSV with header episode,step,a_0..a_{d-1}.
std::string traces_to_csv(const std::vector<ActionTrace>& traces);
// fs is not stored in the file and is supplied by the caller.
std::vector<ActionTrace> traces_from_csv(const std::string& text, double fs);

}  // namespace smooth

#endif  // SMOOTH_METRICS_SPECTRUM_H_
