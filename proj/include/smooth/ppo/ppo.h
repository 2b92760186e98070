#ifndef SMOOTH_PPO_PPO_H_
#define SMOOTH_PPO_PPO_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "smooth/core/rng.h"
#include "smooth/envs/environment.h"
#include "smooth/policy/networks.h"
#include "smooth/smoothing/regularizers.h"
#include "smooth/tensor/adam.h"

namespace smooth {

struct PpoConfig {
  std::size_t n_envs = 8;
  std::size_t rollout_len = 512;
  std::size_t epochs = 10;
  std::size_t minibatch = 512;
  double clip = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  double lr = 3e-4;
  bool normalize_advantages = true;
  std::uint64_t total_steps = 100000;
  std::uint64_t seed = 0;
  // Network shape, shared by actor trunk and critic.
  std::vector<std::size_t> hidden{64, 64};
  double log_std_init = -0.5;

  // Throws ConfigError naming the offending field.
  void validate() const;
  std::size_t steps_per_iteration() const { return n_envs * rollout_len; }
  std::size_t iterations() const;

  friend bool operator==(const PpoConfig&, const PpoConfig&) = default;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one environment's sequence.
// dones[t] cuts the recursion after step t; bootstrap_value is V of the state
// following the last step.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones,
                      double bootstrap_value, double gamma, double lambda);

// Fixed-size rollout storage, env-major: sample (e, t) lives at e * len + t.
class RolloutBuffer {
 public:
  RolloutBuffer(std::size_t n_envs, std::size_t len, std::size_t obs_dim,
                std::size_t action_dim);

  std::size_t n_envs() const { return n_envs_; }
  std::size_t len() const { return len_; }
  std::size_t size() const { return n_envs_ * len_; }
  std::size_t index(std::size_t env, std::size_t t) const {
    return env * len_ + t;
  }

  void store(std::size_t env, std::size_t t, const Vec& state,
             const SampledAction& sample, double value, double reward,
             bool done);
  void set_bootstrap(std::size_t env, double value) {
    bootstrap_.at(env) = value;
  }

  // Fills advantages and returns; normalizes advantages when asked.
  void finalize(double gamma, double lambda, bool normalize);

  // Sample indices whose (t-1, t, t+1) window stays inside one episode and
  // inside the rollout.
  const std::vector<std::size_t>& triple_centers() const { return centers_; }
  // Center index -> position in triple_centers(), or npos.
  std::size_t triple_slot(std::size_t center) const {
    return slot_[center];
  }
  TransitionTriple triple(std::size_t center) const;

  const Tensor& states() const { return states_; }
  const Tensor& actions() const { return actions_; }
  const Tensor& pre_squash() const { return pre_squash_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<std::uint8_t>& dones() const { return dones_; }
  const std::vector<double>& advantages() const { return advantages_; }
  const std::vector<double>& returns() const { return returns_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t n_envs_, len_;
  Tensor states_, actions_, pre_squash_;
  std::vector<double> log_probs_, values_, rewards_, bootstrap_;
  std::vector<std::uint8_t> dones_;
  std::vector<double> advantages_, returns_;
  std::vector<std::size_t> centers_, slot_;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

// Steps n_envs environment copies with the stochastic policy. Episode k of
// env i starts from reset(derive(base_seed + i, k)), except episode 0 which
// uses base_seed + i. Truncated episodes bootstrap gamma * V(s_T) into the
// last reward.
class RolloutCollector {
 public:
  RolloutCollector(const EnvFactory& factory, std::size_t n_envs,
                   std::uint64_t base_seed, std::uint64_t action_seed);

  void collect(const ActorNetwork& actor, const CriticNetwork& critic,
               double gamma, RolloutBuffer& buffer);

  // Undiscounted returns of episodes finished during the last collect().
  const std::vector<double>& finished_returns() const { return finished_; }
  Environment& env(std::size_t i) { return *envs_[i]; }

 private:
  void reset_env(std::size_t i);

  std::vector<std::unique_ptr<Environment>> envs_;
  std::vector<Vec> states_;
  std::vector<Rng> action_rngs_;
  std::vector<std::uint64_t> episodes_;
  std::vector<double> running_;
  std::vector<double> finished_;
  std::uint64_t base_seed_;
};

struct UpdateStats {
  double j_pi = 0.0;
  double l_s = 0.0;
  double l_p = 0.0;
  double l_t = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;
  double clip_fraction = 0.0;
  double total = 0.0;
  std::size_t minibatches = 0;
};

// Actor and critic parameters with their shared Adam state.
class PpoLearner {
 public:
  PpoLearner(ActorNetwork& actor, CriticNetwork& critic,
             const PpoConfig& config, const RegularizerSpec& spec);

  // One PPO update: epochs x shuffled minibatches. Regularizer terms use the
  // valid triples centered in each minibatch. Throws NumericError if any
  // loss turns non-finite.
  UpdateStats update(const RolloutBuffer& buffer, Rng& shuffle_rng,
                     Rng& regularizer_rng);

  // Loss value and gradients for one minibatch without stepping.
  struct Evaluation {
    UpdateStats stats;
    std::vector<Tensor> grads;
  };
  Evaluation evaluate(const RolloutBuffer& buffer,
                      std::span<const std::size_t> indices,
                      Rng& regularizer_rng) const;
  // Applies clipping and one Adam step with the given gradients.
  double apply(std::vector<Tensor> grads);

  std::vector<const Tensor*> parameter_tensors() const;
  const AdamState& optimizer() const { return adam_; }

 private:
  ActorNetwork* actor_;
  CriticNetwork* critic_;
  PpoConfig config_;
  RegularizerSpec spec_;
  std::vector<Tensor*> params_;
  AdamState adam_;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::uint64_t steps = 0;
  double mean_return = 0.0;
  UpdateStats stats;
};

using MetricsSink = std::function<void(const IterationRecord&)>;

std::string metrics_csv_header();
std::string metrics_csv_row(const IterationRecord& record);

// Streams: env seeds, action sampling, minibatch shuffling, regularizer
// sampling. All derived from PpoConfig::seed.
struct SeedStreams {
  std::uint64_t env_base;
  std::uint64_t actions;
  std::uint64_t shuffle;
  std::uint64_t regularizer;
  static SeedStreams from(std::uint64_t seed);
};

// Rollout / update loop for config.iterations() iterations. Fully determined
// by the seed.
void train(const EnvFactory& factory, ActorNetwork& actor,
           CriticNetwork& critic, const RegularizerSpec& spec,
           const PpoConfig& config, const MetricsSink& sink);

// Fresh networks sized for env and initialized from the config seed.
ActorNetwork make_actor(const Environment& env, const PpoConfig& config);
CriticNetwork make_critic(const Environment& env, const PpoConfig& config);

}  // namespace smooth

#endif  // SMOOTH_PPO_PPO_H_
