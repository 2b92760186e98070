#include "smooth/metrics/probes.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "smooth/core/errors.h"

namespace smooth {

std::vector<Anchor> make_anchors(Environment& env, std::size_t n,
                                 std::uint64_t seed) {
  Rng rng(seed);
  const Vec& lo = env.action_low();
  const Vec& hi = env.action_high();
  auto random_action = [&] {
    Vec a(lo.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(lo[i], hi[i]);
    return a;
  };
  std::vector<Anchor> out;
  for (std::size_t k = 0; k < n; ++k) {
    Vec s = env.reset(rng.next_u64());
    std::uint64_t warmup = rng.below(20);
    for (std::uint64_t t = 0; t < warmup; ++t) {
      s = env.step(s, random_action()).next_state;
    }
    out.push_back({s, random_action()});
  }
  return out;
}

double max_pairwise_distance(const std::vector<Vec>& points) {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  const std::size_t d = points[0].size();
  Vec centroid(d, 0.0);
  for (const Vec& p : points) {
    for (std::size_t k = 0; k < d; ++k) centroid[k] += p[k];
  }
  for (double& c : centroid) c /= static_cast<double>(n);
  std::vector<std::pair<double, std::size_t>> by_radius(n);
  for (std::size_t i = 0; i < n; ++i) {
    by_radius[i] = {l2_distance(points[i], centroid), i};
  }
  std::sort(by_radius.begin(), by_radius.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  // The triangle inequality bounds d(p_i, p_j) by r_i + r_j. The radii are
  // rounded, so the pruning test keeps a small margin.
  const double slack = 1e-12 * (by_radius[0].first + 1.0);
  double best = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const double ra = by_radius[a].first;
    if (2.0 * ra + slack < best) break;
    const Vec& pa = points[by_radius[a].second];
    for (std::size_t b = a + 1; b < n; ++b) {
      if (ra + by_radius[b].first + slack < best) break;
      best = std::max(best, l2_distance(pa, points[by_radius[b].second]));
    }
  }
  return best;
}

BoundReport check_similar_state_bound(Environment& env, std::size_t n_anchors,
                                      std::size_t n_samples,
                                      std::uint64_t seed) {
  if (n_anchors == 0) throw ContractError("bound check needs anchors");
  BoundReport report;
  report.bound = 2.0 * env.noise_sensitivity() * env.noise_bound();
  std::vector<Anchor> anchors = make_anchors(env, n_anchors, seed);
  env.reset(seed ^ 0x5a5a5a5a5a5a5a5aULL);
  for (const Anchor& anchor : anchors) {
    double diameter = max_pairwise_distance(
        sample_similar_states(env, anchor.s_prev, anchor.a_prev, n_samples));
    report.per_anchor.push_back(diameter);
    report.max_distance = std::max(report.max_distance, diameter);
    // Similar states are s + xi evaluated in floating point, so their
    // distances carry rounding on the scale of the state itself.
    double scale = 1.0;
    for (double x : anchor.s_prev) scale = std::max(scale, std::abs(x));
    const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * scale;
    if (diameter > report.bound + rounding) ++report.violations;
  }
  return report;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

RatioStats probe_composite_lipschitz(const MeanPolicy& policy,
                                     Environment& env,
                                     const std::vector<Anchor>& anchors,
                                     std::size_t n_pairs, std::uint64_t seed) {
  if (anchors.empty()) throw ContractError("probe needs anchors");
  env.reset(seed);
  RatioStats stats;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const Anchor& anchor = anchors[k % anchors.size()];
    Vec xi1 = env.sample_noise();
    Vec xi2 = env.sample_noise();
    double dxi = l2_distance(xi1, xi2);
    if (dxi < 1e-12) {
      ++stats.skipped;
      continue;
    }
    Vec a = env.clip_action(anchor.a_prev);
    Vec y1 = policy(env.transition(anchor.s_prev, a, xi1));
    Vec y2 = policy(env.transition(anchor.s_prev, a, xi2));
    stats.ratios.push_back(l2_distance(y1, y2) / dxi);
  }
  if (!stats.ratios.empty()) {
    stats.max = *std::max_element(stats.ratios.begin(), stats.ratios.end());
    stats.median = quantile(stats.ratios, 0.5);
    stats.q90 = quantile(stats.ratios, 0.9);
    stats.q99 = quantile(stats.ratios, 0.99);
    stats.mean = std::accumulate(stats.ratios.begin(), stats.ratios.end(), 0.0) /
                 static_cast<double>(stats.ratios.size());
  }
  return stats;
}

double spectral_norm(const std::vector<Vec>& rows, int iterations) {
  if (rows.empty()) return 0.0;
  const std::size_t cols = rows[0].size();
  Vec v(cols, 1.0);
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    // u = W v, v' = W^T u
    Vec u(rows.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) u[r] += rows[r][c] * v[c];
    }
    Vec next(cols, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) next[c] += rows[r][c] * u[r];
    }
    double norm = l2_norm(next);
    if (norm == 0.0) return 0.0;
    for (double& x : next) x /= norm;
    v = std::move(next);
    sigma = std::sqrt(norm);
  }
  return sigma;
}

}  // namespace smooth
