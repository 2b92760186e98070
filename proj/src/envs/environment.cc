#include "smooth/envs/environment.h"

#include <algorithm>
#include <cmath>

#include "smooth/core/errors.h"

namespace smooth {

double l2_norm(const Vec& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

double l2_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ShapeError("l2_distance: length mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

Environment::Environment(EnvParams params) : params_(params) {
  if (!(params_.dt > 0.0)) throw ConfigError("dt must be positive", 0, "dt");
  if (!(params_.noise_bound >= 0.0)) {
    throw ConfigError("noise bound must be non-negative", 0, "sigma_xi");
  }
  if (params_.horizon < 1) {
    throw ConfigError("horizon must be at least 1", 0, "horizon");
  }
  if (params_.noise_sensitivity && !(*params_.noise_sensitivity > 0.0)) {
    throw ConfigError("noise sensitivity must be positive", 0, "k_xi");
  }
}

Vec Environment::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  elapsed_ = 0;
  return initial_state(rng_);
}

Vec Environment::clip_action(const Vec& action) const {
  if (action.size() != action_dim()) {
    throw ShapeError("action has " + std::to_string(action.size()) +
                     " entries, environment expects " +
                     std::to_string(action_dim()));
  }
  Vec out(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    out[i] = std::clamp(action[i], action_low()[i], action_high()[i]);
  }
  return out;
}

Vec Environment::sample_noise() {
  Vec xi(noise_dim(), 0.0);
  const double bound = params_.noise_bound;
  if (bound == 0.0) return xi;
  for (double& x : xi) x = 0.5 * bound * rng_.normal();
  double norm = l2_norm(xi);
  if (norm > bound) {
    for (double& x : xi) x *= bound / norm;
    // Rounding can leave the norm one ulp above the bound.
    const double shrink = std::nextafter(1.0, 0.0);
    while (l2_norm(xi) > bound) {
      for (double& x : xi) x *= shrink;
    }
  }
  return xi;
}

StepResult Environment::step(const Vec& state, const Vec& action,
                             const std::optional<Vec>& noise_override) {
  if (state.size() != state_dim()) {
    throw ShapeError("state has " + std::to_string(state.size()) +
                     " entries, environment expects " +
                     std::to_string(state_dim()));
  }
  Vec noise;
  if (noise_override) {
    if (noise_override->size() != noise_dim()) {
      throw ContractError("noise override must have " +
                          std::to_string(noise_dim()) + " entries");
    }
    if (l2_norm(*noise_override) > params_.noise_bound) {
      throw ContractError("noise override exceeds the noise bound");
    }
    noise = *noise_override;
  } else {
    noise = sample_noise();
  }
  Vec clipped = clip_action(action);
  StepResult result;
  result.next_state = transition(state, clipped, noise);
  result.reward = reward(state, clipped, result.next_state);
  ++elapsed_;
  result.truncated = elapsed_ >= params_.horizon;
  return result;
}

std::vector<Vec> sample_similar_states(Environment& env, const Vec& s_prev,
                                       const Vec& a_prev, std::size_t n) {
  if (n < 2) throw ContractError("sample_similar_states needs n >= 2");
  Vec clipped = env.clip_action(a_prev);
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(env.transition(s_prev, clipped, env.sample_noise()));
  }
  return out;
}

}  // namespace smooth
