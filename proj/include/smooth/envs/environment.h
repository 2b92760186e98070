#ifndef SMOOTH_ENVS_ENVIRONMENT_H_
#define SMOOTH_ENVS_ENVIRONMENT_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smooth/core/rng.h"

namespace smooth {

using Vec = std::vector<double>;

double l2_norm(const Vec& v);
double l2_distance(const Vec& a, const Vec& b);

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

// Common knobs of every environment. Distances on states and noise are
// Euclidean.
struct EnvParams {
  double dt = 0.05;
  // Hard bound on ||xi||_2.
  double noise_bound = 0.01;
  int horizon = 200;
  // Overrides the environment's declared noise-sensitivity constant.
  std::optional<double> noise_sensitivity;
};

// Discrete-time control task s' = T(s, a, xi) with a bounded noise channel.
//
// The observation is the state vector itself, so transition() can be applied
// to any stored state. step() additionally tracks the episode clock that
// drives truncation; transition() is pure.
class Environment {
 public:
  explicit Environment(EnvParams params);
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::size_t noise_dim() const = 0;
  virtual const Vec& action_low() const = 0;
  virtual const Vec& action_high() const = 0;
  // Declared upper bound on the local Lipschitz constant of T in xi.
  virtual double default_noise_sensitivity() const = 0;

  // Deterministic part of the dynamics plus the given noise; the action is
  // clipped to its bounds first.
  virtual Vec transition(const Vec& state, const Vec& action,
                         const Vec& noise) const = 0;
  virtual double reward(const Vec& state, const Vec& action,
                        const Vec& next_state) const = 0;

  Vec reset(std::uint64_t seed);
  StepResult step(const Vec& state, const Vec& action,
                  const std::optional<Vec>& noise_override = std::nullopt);

  // Gaussian with std noise_bound / 2 per coordinate, scaled back onto the
  // ball of radius noise_bound when it lands outside.
  Vec sample_noise();

  Vec clip_action(const Vec& action) const;

  double dt() const { return params_.dt; }
  double control_frequency() const { return 1.0 / params_.dt; }
  double noise_bound() const { return params_.noise_bound; }
  double noise_sensitivity() const {
    return params_.noise_sensitivity.value_or(default_noise_sensitivity());
  }
  int horizon() const { return params_.horizon; }
  int elapsed_steps() const { return elapsed_; }
  const EnvParams& params() const { return params_; }
  Rng& rng() { return rng_; }

  std::unique_ptr<Environment> clone() const { return clone_impl(); }

 protected:
  virtual Vec initial_state(Rng& rng) const = 0;
  virtual std::unique_ptr<Environment> clone_impl() const = 0;

  EnvParams params_;

 private:
  Rng rng_;
  int elapsed_ = 0;
};

// n independent draws of T(s_prev, a_prev, xi) with fresh noise from the
// environment's stream.
std::vector<Vec> sample_similar_states(Environment& env, const Vec& s_prev,
                                       const Vec& a_prev, std::size_t n);

}  // namespace smooth

#endif  // SMOOTH_ENVS_ENVIRONMENT_H_
