#ifndef SMOOTH_POLICY_NETWORKS_H_
#define SMOOTH_POLICY_NETWORKS_H_

#include <functional>
#include <string>
#include <vector>

#include "smooth/core/rng.h"
#include "smooth/envs/environment.h"
#include "smooth/tensor/graph.h"
#include "smooth/tensor/tensor.h"

namespace smooth {

// Affine layer y = x W + b with W stored [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear init(std::size_t in, std::size_t out, double gain, Rng& rng);
};

enum class ParamGroup { kTrunk, kActionHead, kLogStd, kPredictionHead, kCritic };

const char* group_name(ParamGroup group);

struct ParamRef {
  std::string name;
  ParamGroup group;
  Tensor* tensor;
};

struct ActorConfig {
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::size_t> hidden{64, 64};
  Vec action_low;
  Vec action_high;
  double log_std_init = -0.5;
  // Weight scale of both output heads relative to variance scaling.
  double head_init_scale = 0.01;

  void validate() const;
};

struct CriticConfig {
  std::size_t obs_dim = 0;
  std::vector<std::size_t> hidden{64, 64};
};

// Deterministic state -> action map, used by the probes and evaluators.
using MeanPolicy = std::function<Vec(const Vec&)>;

struct SampledAction {
  Vec action;
  // Gaussian draw before squashing; PPO re-scores this, not the action.
  Vec pre_squash;
  double log_prob = 0.0;
};

// Gaussian actor with a tanh-squashed mean and a second "prediction" head.
//
//   features = tanh MLP trunk(s)
//   mean     = center + half_range * tanh(features W_a + b_a)
//   predict  = center + half_range * tanh(features W_p + b_p)
//
// Both heads read the same trunk output. The exploration std is a
// state-independent exp(log_std) applied before squashing.
class ActorNetwork {
 public:
  ActorNetwork(ActorConfig config, Rng& rng);

  const ActorConfig& config() const { return config_; }
  std::size_t obs_dim() const { return config_.obs_dim; }
  std::size_t action_dim() const { return config_.action_dim; }
  const Vec& center() const { return center_; }
  const Vec& half_range() const { return half_range_; }

  // Order: trunk layers (weight, bias), action head, log_std, prediction
  // head. The groups partition the parameters.
  std::vector<ParamRef> parameters();
  std::vector<const Tensor*> parameter_tensors() const;
  std::size_t parameter_count() const;

  Tensor act_mean(const Tensor& states) const;
  Vec act_mean(const Vec& state) const;
  Tensor predict_next_mean(const Tensor& states) const;
  Vec predict_next_mean(const Vec& state) const;
  SampledAction sample_action(const Vec& state, Rng& rng) const;

  MeanPolicy mean_policy() const;

  std::vector<Linear> trunk;
  Linear action_head;
  Linear prediction_head;
  Tensor log_std;

 private:
  ActorConfig config_;
  Vec center_;
  Vec half_range_;
};

class CriticNetwork {
 public:
  CriticNetwork(CriticConfig config, Rng& rng);

  const CriticConfig& config() const { return config_; }
  std::vector<ParamRef> parameters();
  std::vector<const Tensor*> parameter_tensors() const;

  // [batch, obs] -> [batch, 1].
  Tensor value(const Tensor& states) const;
  double value(const Vec& state) const;

  std::vector<Linear> layers;

 private:
  CriticConfig config_;
};

// Mean and prediction maps as graph functions, so the smoothing losses do not
// depend on a particular network.
struct PolicyHeads {
  std::function<Var(Var)> mean;
  std::function<Var(Var)> predict;
};

// Actor parameters bound as leaves of a graph.
class BoundActor {
 public:
  BoundActor(Graph& graph, const ActorNetwork& actor);

  Var features(Var states) const;
  Var pre_mean(Var features) const;
  Var squash(Var pre) const;
  Var mean_from_features(Var features) const {
    return squash(pre_mean(features));
  }
  Var predict_from_features(Var features) const;
  Var mean(Var states) const { return mean_from_features(features(states)); }
  Var predict(Var states) const {
    return predict_from_features(features(states));
  }
  Var log_std() const { return log_std_; }

  // Per-row log density of pre-squash samples u plus the tanh change of
  // variables: [batch, 1].
  Var log_prob(Var pre_mean, const Tensor& pre_squash) const;
  // Entropy of the pre-squash Gaussian.
  Var gaussian_entropy() const;

  PolicyHeads heads() const;

  // Same order as ActorNetwork::parameters().
  const std::vector<Var>& params() const { return params_; }
  std::vector<Tensor> grads() const;
  Graph& graph() const { return *graph_; }

 private:
  Graph* graph_;
  const ActorNetwork* actor_;
  std::vector<Var> params_;
  std::vector<std::pair<Var, Var>> trunk_;
  std::pair<Var, Var> action_head_;
  std::pair<Var, Var> prediction_head_;
  Var log_std_;
  Var center_;
  Var half_range_;
};

class BoundCritic {
 public:
  BoundCritic(Graph& graph, const CriticNetwork& critic);

  Var value(Var states) const;
  const std::vector<Var>& params() const { return params_; }
  std::vector<Tensor> grads() const;

 private:
  Graph* graph_;
  std::vector<Var> params_;
};

// log(d action / d u) summed over dimensions, for a = c + h tanh(u).
double squash_log_det(const Vec& pre_squash, const Vec& half_range);

// Stacks equally sized vectors as rows of a matrix.
Tensor stack_rows(const std::vector<Vec>& rows);

}  // namespace smooth

#endif  // SMOOTH_POLICY_NETWORKS_H_
