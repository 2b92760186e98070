#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "smooth/core/errors.h"
#include "smooth/envs/tasks.h"
#include "smooth/metrics/probes.h"
#include "smooth/metrics/spectrum.h"

namespace smooth {
namespace {

// O(N^2) DFT of the zero-padded signal, one-sided bins 0..N/2.
std::vector<double> direct_dft_magnitudes(const std::vector<double>& x) {
  std::size_t n = next_power_of_two(x.size());
  std::vector<double> out;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> sum = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                     static_cast<double>(n);
      sum += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out.push_back(std::abs(sum));
  }
  return out;
}

double oracle_smoothness(std::vector<double> x, double fs) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double& v : x) v -= mean;
  std::vector<double> m = direct_dft_magnitudes(x);
  std::size_t n_fft = next_power_of_two(x.size());
  std::size_t bins = m.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 1; i <= bins; ++i) {
    sum += m[i] * static_cast<double>(i) * fs / static_cast<double>(n_fft);
  }
  return 2.0 / (static_cast<double>(bins) * fs) * sum;
}

std::vector<double> tone(std::size_t n, std::size_t bin, double amplitude) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = amplitude * std::cos(2.0 * std::numbers::pi *
                                static_cast<double>(bin * t) /
                                static_cast<double>(n));
  }
  return x;
}

TEST(SpectrumTest, ConstantSignalHasNoAcContent) {
  std::vector<double> x{1, 1, 1, 1};
  Spectrum s = dft_magnitudes(x, 10.0);
  ASSERT_EQ(s.magnitudes.size(), 3u);
  EXPECT_NEAR(s.magnitudes[0], 4.0, 1e-15);
  EXPECT_NEAR(s.magnitudes[1], 0.0, 1e-15);
  EXPECT_NEAR(s.magnitudes[2], 0.0, 1e-15);
  EXPECT_EQ(smoothness(x, 10.0), 0.0);
}

TEST(SmoothnessTest, PaddedConstantScoresZero) {
  for (std::size_t n : {9, 40, 200, 1000}) {
    for (double c : {0.3, -1.7, 1e-3}) {
      std::vector<double> x(n, c);
      EXPECT_EQ(smoothness(x, 20.0), 0.0) << n << " " << c;
    }
  }
}

TEST(SmoothnessTest, OffsetDoesNotChangeTheScore) {
  Rng rng(21);
  std::vector<double> x(200);
  for (double& v : x) v = rng.normal();
  double base = smoothness(x, 20.0);
  for (double& v : x) v += 5.0;
  EXPECT_NEAR(smoothness(x, 20.0), base, 1e-9 * base);
}

TEST(SpectrumTest, QuarterWaveExample) {
  std::vector<double> x{0, 1, 0, -1};
  Spectrum s = dft_magnitudes(x, 4.0);
  std::vector<double> oracle = direct_dft_magnitudes(x);
  ASSERT_EQ(s.magnitudes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(s.magnitudes[i], oracle[i], 1e-12);
  }
  EXPECT_NEAR(s.magnitudes[0], 0.0, 1e-15);
  EXPECT_NEAR(s.magnitudes[1], 2.0, 1e-15);
  EXPECT_NEAR(s.magnitudes[2], 0.0, 1e-15);
  EXPECT_EQ(s.frequencies, (std::vector<double>{0.0, 1.0, 2.0}));
}

TEST(SpectrumTest, FftMatchesDirectDft) {
  Rng rng(17);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t len = 2 + rng.below(255);
    std::vector<double> x(len);
    for (double& v : x) v = rng.uniform(-2, 2);
    Spectrum s = dft_magnitudes(x, 50.0);
    std::vector<double> oracle = direct_dft_magnitudes(x);
    ASSERT_EQ(s.magnitudes.size(), oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      worst = std::max(worst, std::abs(s.magnitudes[i] - oracle[i]));
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(SpectrumTest, Parseval) {
  Rng rng(3);
  for (std::size_t n : {2u, 8u, 64u, 256u}) {
    std::vector<std::complex<double>> data(n);
    double time_energy = 0.0;
    for (auto& v : data) {
      v = rng.normal();
      time_energy += std::norm(v);
    }
    fft_inplace(data);
    double freq_energy = 0.0;
    for (auto& v : data) freq_energy += std::norm(v);
    EXPECT_NEAR(time_energy, freq_energy / static_cast<double>(n), 1e-9);
  }
}

TEST(SpectrumTest, FftRejectsNonPowerOfTwo) {
  std::vector<std::complex<double>> data(6);
  EXPECT_THROW(fft_inplace(data), ContractError);
  std::vector<double> one{1.0};
  EXPECT_THROW(dft_magnitudes(one, 1.0), ContractError);
  std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(dft_magnitudes(two, 0.0), ContractError);
}

TEST(SmoothnessTest, AlternatingSignalMatchesOracle) {
  std::vector<double> x(64);
  for (std::size_t t = 0; t < 64; ++t) x[t] = t % 2 == 0 ? 1.0 : -1.0;
  double fft_value = smoothness(x, 100.0);
  EXPECT_NEAR(fft_value, oracle_smoothness(x, 100.0), 1e-9);
  // All energy at Nyquist: M = 64, f = 50, n = 32 -> 2 / 3200 * 3200 = 2.
  EXPECT_NEAR(fft_value, 2.0, 1e-12);
}

TEST(SmoothnessTest, ToneRatioAndMonotonicity) {
  double fs = 20.0;
  double a = smoothness(tone(256, 4, 1.0), fs);
  double b = smoothness(tone(256, 16, 1.0), fs);
  EXPECT_NEAR(b / a, 4.0, 0.04);
  EXPECT_NEAR(a, oracle_smoothness(tone(256, 4, 1.0), fs), 1e-9);
  double previous = 0.0;
  for (std::size_t bin = 1; bin < 128; bin += 7) {
    double sm = smoothness(tone(256, bin, 1.0), fs);
    EXPECT_GT(sm, previous);
    previous = sm;
  }
}

TEST(SmoothnessTest, ScalesWithAbsoluteGain) {
  Rng rng(8);
  std::vector<double> x(100);
  for (double& v : x) v = rng.normal();
  double base = smoothness(x, 30.0);
  for (double c : {-3.0, 0.5, 2.0}) {
    std::vector<double> y = x;
    for (double& v : y) v *= c;
    EXPECT_NEAR(smoothness(y, 30.0), std::abs(c) * base, 1e-9 * base);
  }
}

ActionTrace trace_of(std::vector<std::vector<double>> columns, double fs) {
  ActionTrace t;
  t.fs = fs;
  for (std::size_t s = 0; s < columns[0].size(); ++s) {
    Vec row;
    for (const auto& c : columns) row.push_back(c[s]);
    t.actions.push_back(row);
  }
  return t;
}

TEST(SmoothnessReportTest, AggregatesDimsThenEpisodes) {
  std::vector<double> flat(32, 0.3);
  ActionTrace a = trace_of({flat, tone(32, 2, 1.0)}, 10.0);
  ActionTrace b = trace_of({tone(32, 4, 1.0), flat}, 10.0);
  b.episode = 1;
  SmoothnessReport r = smoothness_score({a, b}, {-1.0, -3.0});
  double s2 = smoothness(tone(32, 2, 1.0), 10.0);
  double s4 = smoothness(tone(32, 4, 1.0), 10.0);
  ASSERT_EQ(r.per_dim.size(), 2u);
  EXPECT_NEAR(r.per_dim[0], s4 / 2, 1e-12);
  EXPECT_NEAR(r.per_dim[1], s2 / 2, 1e-12);
  EXPECT_NEAR(r.aggregate, (s2 + s4) / 4, 1e-12);
  EXPECT_NEAR(r.aggregate, (r.per_dim[0] + r.per_dim[1]) / 2, 1e-12);
  EXPECT_EQ(r.episodes, 2u);
  EXPECT_DOUBLE_EQ(r.return_mean, -2.0);
  EXPECT_DOUBLE_EQ(r.return_std, 1.0);
  EXPECT_EQ(smoothness_score(trace_of({flat}, 10.0)).aggregate, 0.0);
}

TEST(SmoothnessReportTest, TraceValidation) {
  EXPECT_THROW(smoothness_score(trace_of({std::vector<double>(7, 0.0)}, 1.0)),
               ContractError);
  EXPECT_THROW(smoothness_score(trace_of({std::vector<double>(8, 0.0)}, 0.0)),
               ContractError);
  std::vector<double> bad(8, 0.0);
  bad[3] = NAN;
  EXPECT_THROW(smoothness_score(trace_of({bad}, 1.0)), ContractError);
}

TEST(TraceCsvTest, RoundTrip) {
  ActionTrace a = trace_of({tone(9, 1, 0.7), tone(9, 2, -1.1)}, 20.0);
  ActionTrace b = a;
  b.episode = 4;
  b.actions[2][1] = 1.0 / 3.0;
  std::string csv = traces_to_csv({a, b});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "episode,step,a_0,a_1");
  std::vector<ActionTrace> back = traces_from_csv(csv, 20.0);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].actions, a.actions);
  EXPECT_EQ(back[1].actions, b.actions);
  EXPECT_EQ(back[1].episode, 4);
  EXPECT_THROW(traces_from_csv("step,a\n", 1.0), Error);
  EXPECT_THROW(traces_from_csv("episode,step,a_0\n0,0,x\n", 1.0), Error);
}

double brute_force_diameter(const std::vector<Vec>& points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, l2_distance(points[i], points[j]));
    }
  }
  return best;
}

TEST(DiameterTest, MatchesBruteForce) {
  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t dim = 1 + rng.below(4);
    std::size_t n = 2 + rng.below(400);
    std::vector<Vec> pts(n, Vec(dim));
    for (Vec& p : pts) {
      for (double& x : p) x = trial % 2 ? rng.normal() : rng.uniform(-1, 1);
    }
    EXPECT_EQ(max_pairwise_distance(pts), brute_force_diameter(pts));
  }
  EXPECT_EQ(max_pairwise_distance({}), 0.0);
  EXPECT_EQ(max_pairwise_distance({Vec{1.0, 2.0}, Vec{1.0, 2.0}}), 0.0);
}

std::unique_ptr<Environment> env_with(const std::string& name,
                                      EnvSettings settings) {
  return make_environment(name, settings);
}

TEST(BoundCheckTest, NoiselessEnvironmentHasZeroDiameter) {
  auto env = env_with("point_mass", {{"sigma_xi", 0.0}});
  BoundReport r = check_similar_state_bound(*env, 10, 500, 1);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.max_distance, 0.0);
}

TEST(BoundCheckTest, DeclaredConstantsHold) {
  for (const std::string& name : environment_names()) {
    auto env = env_with(name, {});
    BoundReport r = check_similar_state_bound(*env, 20, 2000, 2);
    EXPECT_TRUE(r.pass()) << name << " max " << r.max_distance << " bound "
                          << r.bound;
    EXPECT_EQ(r.per_anchor.size(), 20u);
    EXPECT_GT(r.max_distance, 0.5 * r.bound) << name;
  }
}

TEST(BoundCheckTest, MisdeclaredSensitivityIsCaught) {
  auto env = env_with("point_mass", {{"k_xi", 0.1}});
  BoundReport r = check_similar_state_bound(*env, 20, 2000, 2);
  EXPECT_FALSE(r.pass());
  EXPECT_EQ(r.violations, 20u);
}

TEST(ProbeTest, ConstantPolicyHasZeroRatios) {
  auto env = env_with("pendulum", {});
  std::vector<Anchor> anchors = make_anchors(*env, 10, 3);
  RatioStats s = probe_composite_lipschitz(
      [](const Vec&) { return Vec{0.25}; }, *env, anchors, 1000, 4);
  EXPECT_EQ(s.ratios.size(), 1000u);
  EXPECT_EQ(s.max, 0.0);
}

TEST(ProbeTest, LinearPolicyBoundedByOperatorNorm) {
  auto env = env_with("point_mass", {});
  std::vector<Anchor> anchors = make_anchors(*env, 50, 5);
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Vec> w(3, Vec(2));
    for (Vec& row : w) {
      for (double& x : row) x = rng.normal();
    }
    MeanPolicy linear = [&](const Vec& s) {
      Vec y(3, 0.0);
      for (std::size_t r = 0; r < 3; ++r) y[r] = w[r][0] * s[0] + w[r][1] * s[1];
      return y;
    };
    double norm = spectral_norm(w);
    RatioStats s = probe_composite_lipschitz(linear, *env, anchors, 2000, 7);
    EXPECT_LE(s.max, norm * (1 + 1e-9));
    EXPECT_GT(s.max, 0.5 * norm);
    EXPECT_LE(s.median, s.q90);
    EXPECT_LE(s.q99, s.max);
  }
}

TEST(ProbeTest, DegenerateNoisePairsSkipped) {
  auto env = env_with("point_mass", {{"sigma_xi", 0.0}});
  std::vector<Anchor> anchors = make_anchors(*env, 5, 5);
  RatioStats s = probe_composite_lipschitz(
      [](const Vec& x) { return x; }, *env, anchors, 100, 1);
  EXPECT_EQ(s.skipped, 100u);
  EXPECT_TRUE(s.ratios.empty());
}

TEST(ProbeTest, SpectralNormAndQuantile) {
  EXPECT_NEAR(spectral_norm({{3.0, 0.0}, {0.0, -5.0}}), 5.0, 1e-12);
  EXPECT_NEAR(spectral_norm({{1.0, 1.0}}), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_EQ(quantile({1.0, 2.0}, 0.5), 1.5);
}

}  // namespace
}  // namespace smooth
