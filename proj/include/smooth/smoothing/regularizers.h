#ifndef SMOOTH_SMOOTHING_REGULARIZERS_H_
#define SMOOTH_SMOOTHING_REGULARIZERS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smooth/core/rng.h"
#include "smooth/envs/environment.h"
#include "smooth/policy/networks.h"
#include "smooth/tensor/graph.h"

namespace smooth {

enum class SpatialMethod { kNone, kCapsGaussian, kL2c2Interp, kAsap };
enum class TemporalMethod { kNone, kCapsFirstOrder, kGradCaps };

std::string to_string(SpatialMethod method);
std::string to_string(TemporalMethod method);
SpatialMethod parse_spatial_method(const std::string& name);
TemporalMethod parse_temporal_method(const std::string& name);

// One spatial and one temporal smoothness term with their weights.
//   spatial: lambda_s (and lambda_p for the asap prediction head)
//   temporal: lambda_t
struct RegularizerSpec {
  SpatialMethod spatial = SpatialMethod::kNone;
  TemporalMethod temporal = TemporalMethod::kNone;
  double lambda_s = 0.5;
  double lambda_p = 0.1;
  double lambda_t = 0.25;
  // Std of the Gaussian perturbation of caps_gaussian.
  double caps_sigma = 0.05;
  // Stability constant in the grad_caps denominator.
  double eps_t = 1e-3;

  // Throws ConfigError on negative weights, a negative caps_sigma or a
  // non-positive eps_t. lambda_p is ignored unless spatial is asap.
  void validate() const;

  bool uses_spatial() const {
    return spatial != SpatialMethod::kNone && lambda_s > 0.0;
  }
  bool uses_prediction() const {
    return spatial == SpatialMethod::kAsap && lambda_p > 0.0;
  }
  bool uses_temporal() const {
    return temporal != TemporalMethod::kNone && lambda_t > 0.0;
  }

  friend bool operator==(const RegularizerSpec&,
                         const RegularizerSpec&) = default;
};

// Window (t-1, t, t+1) of one environment's trajectory. Only triples that
// stay inside one episode are valid.
struct TransitionTriple {
  Vec s_prev, a_prev;
  Vec s_cur, a_cur;
  Vec s_next, a_next;
  double reward = 0.0;
  bool valid = false;
};

// States of a batch of valid triples as [batch, state_dim] matrices.
struct TripleBatch {
  Tensor s_prev;
  Tensor s_cur;
  Tensor s_next;

  std::size_t size() const { return s_cur.rows(); }

  // Throws ContractError on an empty batch or an invalid triple.
  static TripleBatch from(const std::vector<TransitionTriple>& triples);
};

// ----- terms on precomputed action means -----
// All take [batch, action_dim] means and return the batch mean of a squared
// L2 norm over action dimensions.

// || mean(s_t) - stopgrad(predict(s_{t-1})) ||^2
Var asap_spatial_term(Graph& g, Var mean_cur, Var predict_prev);
// || predict(s_{t-1}) - stopgrad(mean(s_t)) ||^2
Var asap_prediction_term(Graph& g, Var predict_prev, Var mean_cur);
// || (a_{t+1} - 2 a_t + a_{t-1}) / (tanh(a_{t+1} - a_{t-1}) + eps) ||^2,
// elementwise. The denominator's magnitude is floored at eps / 2 so the term
// stays finite where tanh(.) is close to -eps.
Var grad_caps_term(Graph& g, Var mean_prev, Var mean_cur, Var mean_next,
                   double eps);
// || a_t - a_{t+1} ||^2
Var caps_temporal_term(Graph& g, Var mean_cur, Var mean_next);
// || a - a_similar ||^2
Var action_distance_term(Graph& g, Var mean_a, Var mean_b);

// ----- losses on a batch -----

Var loss_asap_spatial(Graph& g, const PolicyHeads& policy,
                      const TripleBatch& batch);
Var loss_asap_pred(Graph& g, const PolicyHeads& policy,
                   const TripleBatch& batch);
Var loss_grad_caps_temporal(Graph& g, const PolicyHeads& policy,
                            const TripleBatch& batch, double eps);
Var loss_caps_temporal(Graph& g, const PolicyHeads& policy,
                       const TripleBatch& batch);
// Similar states s_t + sigma * z, z standard normal.
Var loss_caps_spatial(Graph& g, const PolicyHeads& policy,
                      const TripleBatch& batch, double sigma, Rng& rng);
Tensor caps_similar_states(const Tensor& s_cur, double sigma, Rng& rng);
// Similar states s_t + (s_{t+1} - s_t) * u, u ~ Uniform(0, 1) per row.
Var loss_l2c2_spatial(Graph& g, const PolicyHeads& policy,
                      const TripleBatch& batch, Rng& rng);
// Same with the interpolation weights given.
Var loss_l2c2_spatial(Graph& g, const PolicyHeads& policy,
                      const TripleBatch& batch, std::span<const double> u);
Tensor l2c2_similar_states(const Tensor& s_cur, const Tensor& s_next,
                           std::span<const double> u);

// ----- assembly -----

struct RegularizerTerms {
  std::optional<double> spatial;
  std::optional<double> prediction;
  std::optional<double> temporal;
};

struct RegularizerVars {
  std::optional<Var> spatial;
  std::optional<Var> prediction;
  std::optional<Var> temporal;
};

// J + lambda_s L_S + lambda_p L_P + lambda_t L_T. A term is added only when
// it is present and its weight is positive, so zero weights return j_pi
// unchanged.
double assemble_policy_loss(double j_pi, const RegularizerSpec& spec,
                            const RegularizerTerms& terms);
Var assemble_policy_loss(Graph& g, Var j_pi, const RegularizerSpec& spec,
                         const RegularizerVars& terms);

// || pi(s_t) - mean_i pi(s_i) ||^2 where s_t and the n samples s_i are drawn
// from the environment's transition distribution at (s_prev, a_prev).
double estimate_expectation_loss(const MeanPolicy& policy, Environment& env,
                                 const Vec& s_prev, const Vec& a_prev,
                                 std::size_t n);

}  // namespace smooth

#endif  // SMOOTH_SMOOTHING_REGULARIZERS_H_
