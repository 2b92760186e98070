#ifndef SMOOTH_METRICS_PROBES_H_
#define SMOOTH_METRICS_PROBES_H_

#include <cstdint>
#include <vector>

#include "smooth/envs/environment.h"
#include "smooth/policy/networks.h"

namespace smooth {

// Predecessor state and action of a similar-state neighborhood.
struct Anchor {
  Vec s_prev;
  Vec a_prev;
};

// Anchors from seeded resets followed by 0..19 steps of uniform random
// actions; the anchor action is uniform in the action box. Reseeds env.
std::vector<Anchor> make_anchors(Environment& env, std::size_t n,
                                 std::uint64_t seed);

// Largest pairwise L2 distance, exact. Points are visited in decreasing
// distance from their centroid and a pair is skipped once the two radii can
// no longer beat the current best.
double max_pairwise_distance(const std::vector<Vec>& points);

struct BoundReport {
  double bound = 0.0;
  double max_distance = 0.0;
  std::vector<double> per_anchor;
  std::size_t violations = 0;
  bool pass() const { return violations == 0; }
};

// For each anchor, draws n_samples similar states and compares their
// diameter with 2 K_xi sigma_xi, allowing 8 ulps of the state's magnitude
// for rounding.
BoundReport check_similar_state_bound(Environment& env, std::size_t n_anchors,
                                      std::size_t n_samples,
                                      std::uint64_t seed);

struct RatioStats {
  std::vector<double> ratios;
  std::size_t skipped = 0;
  double max = 0.0;
  double median = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
  double mean = 0.0;
};

// Linear-interpolated quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

// n_pairs noise pairs spread round-robin over the anchors:
//   ||pi(T(s, a, xi1)) - pi(T(s, a, xi2))|| / ||xi1 - xi2||.
// Pairs closer than 1e-12 in noise space are skipped. Reseeds env.
RatioStats probe_composite_lipschitz(const MeanPolicy& policy,
                                     Environment& env,
                                     const std::vector<Anchor>& anchors,
                                     std::size_t n_pairs, std::uint64_t seed);

// Largest singular value by power iteration on W^T W.
double spectral_norm(const std::vector<Vec>& rows, int iterations = 200);

}  // namespace smooth

#endif  // SMOOTH_METRICS_PROBES_H_
