#ifndef SMOOTH_ENVS_TASKS_H_
#define SMOOTH_ENVS_TASKS_H_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "smooth/envs/environment.h"

namespace smooth {

// Planar point with velocity control: s' = s + dt * clip(a) + xi.
// State is the position. Reward -||s' - goal||^2 - 0.01 ||a||^2.
class NoisyPointMass : public Environment {
 public:
  struct Options {
    EnvParams base{.dt = 0.05, .noise_bound = 0.01, .horizon = 100};
    double goal_x = 0.5;
    double goal_y = -0.5;
    double init_range = 1.0;
    double max_speed = 1.0;
  };

  explicit NoisyPointMass(Options options);

  std::string name() const override { return "point_mass"; }
  std::size_t state_dim() const override { return 2; }
  std::size_t action_dim() const override { return 2; }
  std::size_t noise_dim() const override { return 2; }
  const Vec& action_low() const override { return low_; }
  const Vec& action_high() const override { return high_; }
  // Noise enters additively.
  double default_noise_sensitivity() const override { return 1.0; }

  Vec transition(const Vec& state, const Vec& action,
                 const Vec& noise) const override;
  double reward(const Vec& state, const Vec& action,
                const Vec& next_state) const override;

  const Options& options() const { return options_; }

 protected:
  Vec initial_state(Rng& rng) const override;
  std::unique_ptr<Environment> clone_impl() const override;

 private:
  Options options_;
  Vec low_, high_;
};

// Torque-driven pendulum, theta = 0 upright.
//   omega' = clip(omega + dt * ((g/l) sin(theta) + a / (m l^2)))
//   theta' = theta + dt * omega'
// followed by additive noise on (theta', omega'). The state is
// (cos theta, sin theta, omega). Reward -(theta^2 + 0.1 omega^2 + 0.001 a^2)
// with theta wrapped to [-pi, pi].
class Pendulum : public Environment {
 public:
  struct Options {
    EnvParams base{.dt = 0.05, .noise_bound = 0.01, .horizon = 200};
    double gravity = 10.0;
    double length = 1.0;
    double mass = 1.0;
    double max_torque = 2.0;
    double max_speed = 8.0;
    double init_speed = 1.0;
  };

  explicit Pendulum(Options options);

  std::string name() const override { return "pendulum"; }
  std::size_t state_dim() const override { return 3; }
  std::size_t action_dim() const override { return 1; }
  std::size_t noise_dim() const override { return 2; }
  const Vec& action_low() const override { return low_; }
  const Vec& action_high() const override { return high_; }
  // The angle embedding has chord <= arc and the speed clip is a projection,
  // so additive noise on (theta, omega) moves the state by at most ||xi||.
  double default_noise_sensitivity() const override { return 1.0; }

  Vec transition(const Vec& state, const Vec& action,
                 const Vec& noise) const override;
  double reward(const Vec& state, const Vec& action,
                const Vec& next_state) const override;

  static Vec encode(double theta, double omega);
  static double angle(const Vec& state);

  const Options& options() const { return options_; }

 protected:
  Vec initial_state(Rng& rng) const override;
  std::unique_ptr<Environment> clone_impl() const override;

 private:
  Options options_;
  Vec low_, high_;
};

// Kinematic two-link arm driven by joint velocities:
//   q' = clamp(q + dt * (clip(a) + xi), joint limits)
// State is (cos q1, sin q1, cos q2, sin q2). Reward -||tip - target||^2.
class TwoLinkReacher : public Environment {
 public:
  struct Options {
    EnvParams base{.dt = 0.05, .noise_bound = 0.1, .horizon = 100};
    double link1 = 1.0;
    double link2 = 0.8;
    double target_x = 0.9;
    double target_y = 0.9;
    double joint_limit = 2.6;
    double max_speed = 1.0;
    double init_range = 1.5;
  };

  explicit TwoLinkReacher(Options options);

  std::string name() const override { return "reacher"; }
  std::size_t state_dim() const override { return 4; }
  std::size_t action_dim() const override { return 2; }
  std::size_t noise_dim() const override { return 2; }
  const Vec& action_low() const override { return low_; }
  const Vec& action_high() const override { return high_; }
  // Noise is a joint-velocity disturbance, integrated over one step.
  double default_noise_sensitivity() const override { return params_.dt; }

  Vec transition(const Vec& state, const Vec& action,
                 const Vec& noise) const override;
  double reward(const Vec& state, const Vec& action,
                const Vec& next_state) const override;

  static Vec encode(double q1, double q2);
  static std::pair<double, double> joint_angles(const Vec& state);
  std::pair<double, double> tip(const Vec& state) const;

  const Options& options() const { return options_; }

 protected:
  Vec initial_state(Rng& rng) const override;
  std::unique_ptr<Environment> clone_impl() const override;

 private:
  Options options_;
  Vec low_, high_;
};

using EnvSettings = std::map<std::string, double>;

// Builds a registered environment by name ("point_mass", "pendulum",
// "reacher") from key=value settings. Unknown names or keys throw
// ConfigError.
std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const EnvSettings& settings);
std::vector<std::string> environment_names();
std::vector<std::string> environment_keys(const std::string& name);

}  // namespace smooth

#endif  // SMOOTH_ENVS_TASKS_H_
