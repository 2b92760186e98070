#include "smooth/envs/tasks.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smooth/core/errors.h"

namespace smooth {
namespace {

double wrap_angle(double theta) {
  return std::remainder(theta, 2.0 * std::numbers::pi);
}

void require_dims(const Vec& v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw ShapeError(std::string(what) + " must have " + std::to_string(n) +
                     " entries, got " + std::to_string(v.size()));
  }
}

}  // namespace

// ----- NoisyPointMass -----

NoisyPointMass::NoisyPointMass(Options options)
    : Environment(options.base), options_(options) {
  if (!(options_.max_speed > 0.0)) {
    throw ConfigError("max_speed must be positive", 0, "max_speed");
  }
  low_ = {-options_.max_speed, -options_.max_speed};
  high_ = {options_.max_speed, options_.max_speed};
}

Vec NoisyPointMass::initial_state(Rng& rng) const {
  double r = options_.init_range;
  double x = rng.uniform(-r, r);
  double y = rng.uniform(-r, r);
  return {x, y};
}

Vec NoisyPointMass::transition(const Vec& state, const Vec& action,
                               const Vec& noise) const {
  require_dims(state, 2, "point_mass state");
  require_dims(noise, 2, "point_mass noise");
  Vec a = clip_action(action);
  return {state[0] + params_.dt * a[0] + noise[0],
          state[1] + params_.dt * a[1] + noise[1]};
}

double NoisyPointMass::reward(const Vec&, const Vec& action,
                              const Vec& next_state) const {
  double dx = next_state[0] - options_.goal_x;
  double dy = next_state[1] - options_.goal_y;
  double effort = action[0] * action[0] + action[1] * action[1];
  return -(dx * dx + dy * dy) - 0.01 * effort;
}

std::unique_ptr<Environment> NoisyPointMass::clone_impl() const {
  return std::make_unique<NoisyPointMass>(*this);
}

// ----- Pendulum -----

Pendulum::Pendulum(Options options)
    : Environment(options.base), options_(options) {
  if (!(options_.max_torque > 0.0)) {
    throw ConfigError("max_torque must be positive", 0, "max_torque");
  }
  if (!(options_.length > 0.0) || !(options_.mass > 0.0)) {
    throw ConfigError("length and mass must be positive");
  }
  low_ = {-options_.max_torque};
  high_ = {options_.max_torque};
}

Vec Pendulum::encode(double theta, double omega) {
  return {std::cos(theta), std::sin(theta), omega};
}

double Pendulum::angle(const Vec& state) {
  return std::atan2(state[1], state[0]);
}

Vec Pendulum::initial_state(Rng& rng) const {
  double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
  double omega = rng.uniform(-options_.init_speed, options_.init_speed);
  return encode(theta, omega);
}

Vec Pendulum::transition(const Vec& state, const Vec& action,
                         const Vec& noise) const {
  require_dims(state, 3, "pendulum state");
  require_dims(noise, 2, "pendulum noise");
  const Options& o = options_;
  double torque = clip_action(action)[0];
  double theta = angle(state);
  double omega = state[2];
  double accel = (o.gravity / o.length) * std::sin(theta) +
                 torque / (o.mass * o.length * o.length);
  omega = std::clamp(omega + params_.dt * accel, -o.max_speed, o.max_speed);
  theta = theta + params_.dt * omega;
  theta += noise[0];
  omega = std::clamp(omega + noise[1], -o.max_speed, o.max_speed);
  return encode(theta, omega);
}

double Pendulum::reward(const Vec& state, const Vec& action,
                        const Vec&) const {
  double theta = wrap_angle(angle(state));
  double omega = state[2];
  return -(theta * theta + 0.1 * omega * omega +
           0.001 * action[0] * action[0]);
}

std::unique_ptr<Environment> Pendulum::clone_impl() const {
  return std::make_unique<Pendulum>(*this);
}

// ----- TwoLinkReacher -----

TwoLinkReacher::TwoLinkReacher(Options options)
    : Environment(options.base), options_(options) {
  if (!(options_.joint_limit > 0.0) ||
      !(options_.joint_limit < std::numbers::pi)) {
    throw ConfigError("joint_limit must lie in (0, pi)", 0, "joint_limit");
  }
  if (!(options_.max_speed > 0.0)) {
    throw ConfigError("max_speed must be positive", 0, "max_speed");
  }
  low_ = {-options_.max_speed, -options_.max_speed};
  high_ = {options_.max_speed, options_.max_speed};
}

Vec TwoLinkReacher::encode(double q1, double q2) {
  return {std::cos(q1), std::sin(q1), std::cos(q2), std::sin(q2)};
}

std::pair<double, double> TwoLinkReacher::joint_angles(const Vec& state) {
  return {std::atan2(state[1], state[0]), std::atan2(state[3], state[2])};
}

std::pair<double, double> TwoLinkReacher::tip(const Vec& state) const {
  auto [q1, q2] = joint_angles(state);
  double x = options_.link1 * std::cos(q1) + options_.link2 * std::cos(q1 + q2);
  double y = options_.link1 * std::sin(q1) + options_.link2 * std::sin(q1 + q2);
  return {x, y};
}

Vec TwoLinkReacher::initial_state(Rng& rng) const {
  double r = std::min(options_.init_range, options_.joint_limit);
  double q1 = rng.uniform(-r, r);
  double q2 = rng.uniform(-r, r);
  return encode(q1, q2);
}

Vec TwoLinkReacher::transition(const Vec& state, const Vec& action,
                               const Vec& noise) const {
  require_dims(state, 4, "reacher state");
  require_dims(noise, 2, "reacher noise");
  Vec a = clip_action(action);
  auto [q1, q2] = joint_angles(state);
  double limit = options_.joint_limit;
  q1 = std::clamp(q1 + params_.dt * (a[0] + noise[0]), -limit, limit);
  q2 = std::clamp(q2 + params_.dt * (a[1] + noise[1]), -limit, limit);
  return encode(q1, q2);
}

double TwoLinkReacher::reward(const Vec&, const Vec&,
                              const Vec& next_state) const {
  auto [x, y] = tip(next_state);
  double dx = x - options_.target_x;
  double dy = y - options_.target_y;
  return -(dx * dx + dy * dy);
}

std::unique_ptr<Environment> TwoLinkReacher::clone_impl() const {
  return std::make_unique<TwoLinkReacher>(*this);
}

// ----- registry -----

namespace {

class SettingsReader {
 public:
  SettingsReader(const std::string& env, const EnvSettings& settings)
      : env_(env), settings_(settings) {}

  void read(const std::string& key, double& target) {
    known_.push_back(key);
    if (auto it = settings_.find(key); it != settings_.end()) {
      target = it->second;
    }
  }

  void read(const std::string& key, int& target) {
    double value = target;
    read(key, value);
    if (value != std::floor(value)) {
      throw ConfigError("expected an integer", 0, key);
    }
    target = static_cast<int>(value);
  }

  void read_base(EnvParams& base) {
    read("dt", base.dt);
    read("sigma_xi", base.noise_bound);
    read("horizon", base.horizon);
    known_.push_back("k_xi");
    if (auto it = settings_.find("k_xi"); it != settings_.end()) {
      base.noise_sensitivity = it->second;
    }
  }

  void reject_unknown() const {
    for (const auto& [key, value] : settings_) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end()) {
        throw ConfigError("unknown key for environment '" + env_ + "'", 0,
                          key);
      }
    }
  }

  const std::vector<std::string>& known() const { return known_; }

 private:
  std::string env_;
  const EnvSettings& settings_;
  std::vector<std::string> known_;
};

template <typename Env>
std::unique_ptr<Environment> build(const std::string& name,
                                   const EnvSettings& settings,
                                   std::vector<std::string>* keys);

template <>
std::unique_ptr<Environment> build<NoisyPointMass>(
    const std::string& name, const EnvSettings& settings,
    std::vector<std::string>* keys) {
  NoisyPointMass::Options o;
  SettingsReader r(name, settings);
  r.read_base(o.base);
  r.read("goal_x", o.goal_x);
  r.read("goal_y", o.goal_y);
  r.read("init_range", o.init_range);
  r.read("max_speed", o.max_speed);
  if (keys) {
    *keys = r.known();
    return nullptr;
  }
  r.reject_unknown();
  return std::make_unique<NoisyPointMass>(o);
}

template <>
std::unique_ptr<Environment> build<Pendulum>(const std::string& name,
                                             const EnvSettings& settings,
                                             std::vector<std::string>* keys) {
  Pendulum::Options o;
  SettingsReader r(name, settings);
  r.read_base(o.base);
  r.read("gravity", o.gravity);
  r.read("length", o.length);
  r.read("mass", o.mass);
  r.read("max_torque", o.max_torque);
  r.read("max_speed", o.max_speed);
  r.read("init_speed", o.init_speed);
  if (keys) {
    *keys = r.known();
    return nullptr;
  }
  r.reject_unknown();
  return std::make_unique<Pendulum>(o);
}

template <>
std::unique_ptr<Environment> build<TwoLinkReacher>(
    const std::string& name, const EnvSettings& settings,
    std::vector<std::string>* keys) {
  TwoLinkReacher::Options o;
  SettingsReader r(name, settings);
  r.read_base(o.base);
  r.read("link1", o.link1);
  r.read("link2", o.link2);
  r.read("target_x", o.target_x);
  r.read("target_y", o.target_y);
  r.read("joint_limit", o.joint_limit);
  r.read("max_speed", o.max_speed);
  r.read("init_range", o.init_range);
  if (keys) {
    *keys = r.known();
    return nullptr;
  }
  r.reject_unknown();
  return std::make_unique<TwoLinkReacher>(o);
}

using Builder = std::unique_ptr<Environment> (*)(const std::string&,
                                                 const EnvSettings&,
                                                 std::vector<std::string>*);

Builder find_builder(const std::string& name) {
  if (name == "point_mass") return &build<NoisyPointMass>;
  if (name == "pendulum") return &build<Pendulum>;
  if (name == "reacher") return &build<TwoLinkReacher>;
  throw ConfigError("unknown environment '" + name + "'", 0, "name");
}

}  // namespace

std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const EnvSettings& settings) {
  return find_builder(name)(name, settings, nullptr);
}

std::vector<std::string> environment_names() {
  return {"point_mass", "pendulum", "reacher"};
}

std::vector<std::string> environment_keys(const std::string& name) {
  std::vector<std::string> keys;
  find_builder(name)(name, {}, &keys);
  return keys;
}

}  // namespace smooth
