#include "smooth/smoothing/regularizers.h"

#include <cmath>

#include "smooth/core/errors.h"

namespace smooth {
namespace {

Var batch_mean_sq_norm(Graph& g, Var diff) {
  return g.mean(g.row_sum(g.square(diff)));
}

void require_same_shape(Var a, Var b, const char* what) {
  if (a.value().shape() != b.value().shape()) {
    throw ShapeError(std::string(what) + ": action batches differ in shape " +
                     shape_string(a.value().shape()) + " vs " +
                     shape_string(b.value().shape()));
  }
  if (a.value().rank() != 2 || a.value().rows() == 0) {
    throw ContractError(std::string(what) + ": empty batch");
  }
}

void require_nonempty(const TripleBatch& batch) {
  if (batch.s_cur.rank() != 2 || batch.size() == 0) {
    throw ContractError("smoothness loss on an empty batch");
  }
}

}  // namespace

std::string to_string(SpatialMethod method) {
  switch (method) {
    case SpatialMethod::kNone: return "none";
    case SpatialMethod::kCapsGaussian: return "caps_gaussian";
    case SpatialMethod::kL2c2Interp: return "l2c2_interp";
    case SpatialMethod::kAsap: return "asap";
  }
  return "none";
}

std::string to_string(TemporalMethod method) {
  switch (method) {
    case TemporalMethod::kNone: return "none";
    case TemporalMethod::kCapsFirstOrder: return "caps_first_order";
    case TemporalMethod::kGradCaps: return "grad_caps";
  }
  return "none";
}

SpatialMethod parse_spatial_method(const std::string& name) {
  if (name == "none") return SpatialMethod::kNone;
  if (name == "caps_gaussian") return SpatialMethod::kCapsGaussian;
  if (name == "l2c2_interp") return SpatialMethod::kL2c2Interp;
  if (name == "asap") return SpatialMethod::kAsap;
  throw ConfigError("unknown spatial method '" + name + "'", 0, "spatial");
}

TemporalMethod parse_temporal_method(const std::string& name) {
  if (name == "none") return TemporalMethod::kNone;
  if (name == "caps_first_order") return TemporalMethod::kCapsFirstOrder;
  if (name == "grad_caps") return TemporalMethod::kGradCaps;
  throw ConfigError("unknown temporal method '" + name + "'", 0, "temporal");
}

void RegularizerSpec::validate() const {
  if (!(lambda_s >= 0.0)) throw ConfigError("must be >= 0", 0, "lambda_s");
  if (!(lambda_p >= 0.0)) throw ConfigError("must be >= 0", 0, "lambda_p");
  if (!(lambda_t >= 0.0)) throw ConfigError("must be >= 0", 0, "lambda_t");
  if (!(eps_t > 0.0)) throw ConfigError("must be > 0", 0, "eps_t");
  if (!(caps_sigma >= 0.0)) throw ConfigError("must be >= 0", 0, "caps_sigma");
}

TripleBatch TripleBatch::from(const std::vector<TransitionTriple>& triples) {
  if (triples.empty()) throw ContractError("empty triple batch");
  std::vector<Vec> prev, cur, next;
  for (const TransitionTriple& t : triples) {
    if (!t.valid) {
      throw ContractError("invalid transition triple in smoothness batch");
    }
    prev.push_back(t.s_prev);
    cur.push_back(t.s_cur);
    next.push_back(t.s_next);
  }
  return {stack_rows(prev), stack_rows(cur), stack_rows(next)};
}

Var asap_spatial_term(Graph& g, Var mean_cur, Var predict_prev) {
  require_same_shape(mean_cur, predict_prev, "asap spatial");
  return batch_mean_sq_norm(g, mean_cur - g.stop_gradient(predict_prev));
}

Var asap_prediction_term(Graph& g, Var predict_prev, Var mean_cur) {
  require_same_shape(mean_cur, predict_prev, "asap prediction");
  return batch_mean_sq_norm(g, predict_prev - g.stop_gradient(mean_cur));
}

Var grad_caps_term(Graph& g, Var mean_prev, Var mean_cur, Var mean_next,
                   double eps) {
  if (!(eps > 0.0)) throw ContractError("grad_caps needs eps > 0");
  require_same_shape(mean_prev, mean_cur, "grad_caps");
  require_same_shape(mean_cur, mean_next, "grad_caps");
  Var second_diff = mean_next - mean_cur * 2.0 + mean_prev;
  Var denom = g.floor_magnitude(g.tanh(mean_next - mean_prev) + eps, 0.5 * eps);
  return batch_mean_sq_norm(g, second_diff / denom);
}

Var caps_temporal_term(Graph& g, Var mean_cur, Var mean_next) {
  require_same_shape(mean_cur, mean_next, "caps temporal");
  return batch_mean_sq_norm(g, mean_cur - mean_next);
}

Var action_distance_term(Graph& g, Var mean_a, Var mean_b) {
  require_same_shape(mean_a, mean_b, "spatial");
  return batch_mean_sq_norm(g, mean_a - mean_b);
}

Var loss_asap_spatial(Graph& g, const PolicyHeads& policy,
                      const TripleBatch& batch) {
  require_nonempty(batch);
  return asap_spatial_term(g, policy.mean(g.constant(batch.s_cur)),
                           policy.predict(g.constant(batch.s_prev)));
}

Var loss_asap_pred(Graph& g, const PolicyHeads& policy,
                   const TripleBatch& batch) {
  require_nonempty(batch);
  return asap_prediction_term(g, policy.predict(g.constant(batch.s_prev)),
                              policy.mean(g.constant(batch.s_cur)));
}

Var loss_grad_caps_temporal(Graph& g, const PolicyHeads& policy,
                            const TripleBatch& batch, double eps) {
  require_nonempty(batch);
  return grad_caps_term(g, policy.mean(g.constant(batch.s_prev)),
                        policy.mean(g.constant(batch.s_cur)),
                        policy.mean(g.constant(batch.s_next)), eps);
}

Var loss_caps_temporal(Graph& g, const PolicyHeads& policy,
                       const TripleBatch& batch) {
  require_nonempty(batch);
  return caps_temporal_term(g, policy.mean(g.constant(batch.s_cur)),
                            policy.mean(g.constant(batch.s_next)));
}

Tensor caps_similar_states(const Tensor& s_cur, double sigma, Rng& rng) {
  Tensor out = s_cur;
  for (double& x : out.data()) x += sigma * rng.normal();
  return out;
}

Var loss_caps_spatial(Graph& g, const PolicyHeads& policy,
                      const TripleBatch& batch, double sigma, Rng& rng) {
  require_nonempty(batch);
  Tensor similar = caps_similar_states(batch.s_cur, sigma, rng);
  return action_distance_term(g, policy.mean(g.constant(batch.s_cur)),
                              policy.mean(g.constant(std::move(similar))));
}

Tensor l2c2_similar_states(const Tensor& s_cur, const Tensor& s_next,
                           std::span<const double> u) {
  if (s_cur.shape() != s_next.shape() || u.size() != s_cur.rows()) {
    throw ShapeError("l2c2: need one interpolation weight per row");
  }
  Tensor out = s_cur;
  for (std::size_t r = 0; r < s_cur.rows(); ++r) {
    for (std::size_t c = 0; c < s_cur.cols(); ++c) {
      // Written as a convex combination so u = 0 and u = 1 hit the
      // endpoints exactly.
      out.at(r, c) = (1.0 - u[r]) * s_cur.at(r, c) + u[r] * s_next.at(r, c);
    }
  }
  return out;
}

Var loss_l2c2_spatial(Graph& g, const PolicyHeads& policy,
                      const TripleBatch& batch, std::span<const double> u) {
  require_nonempty(batch);
  Tensor similar = l2c2_similar_states(batch.s_cur, batch.s_next, u);
  return action_distance_term(g, policy.mean(g.constant(batch.s_cur)),
                              policy.mean(g.constant(std::move(similar))));
}

Var loss_l2c2_spatial(Graph& g, const PolicyHeads& policy,
                      const TripleBatch& batch, Rng& rng) {
  require_nonempty(batch);
  std::vector<double> u(batch.size());
  for (double& x : u) x = rng.uniform();
  return loss_l2c2_spatial(g, policy, batch, u);
}

double assemble_policy_loss(double j_pi, const RegularizerSpec& spec,
                            const RegularizerTerms& terms) {
  double total = j_pi;
  if (terms.spatial && spec.lambda_s > 0.0) {
    total += spec.lambda_s * *terms.spatial;
  }
  if (terms.prediction && spec.lambda_p > 0.0) {
    total += spec.lambda_p * *terms.prediction;
  }
  if (terms.temporal && spec.lambda_t > 0.0) {
    total += spec.lambda_t * *terms.temporal;
  }
  return total;
}

Var assemble_policy_loss(Graph& g, Var j_pi, const RegularizerSpec& spec,
                         const RegularizerVars& terms) {
  Var total = j_pi;
  if (terms.spatial && spec.lambda_s > 0.0) {
    total = g.add(total, g.scale(*terms.spatial, spec.lambda_s));
  }
  if (terms.prediction && spec.lambda_p > 0.0) {
    total = g.add(total, g.scale(*terms.prediction, spec.lambda_p));
  }
  if (terms.temporal && spec.lambda_t > 0.0) {
    total = g.add(total, g.scale(*terms.temporal, spec.lambda_t));
  }
  return total;
}

double estimate_expectation_loss(const MeanPolicy& policy, Environment& env,
                                 const Vec& s_prev, const Vec& a_prev,
                                 std::size_t n) {
  Vec a = env.clip_action(a_prev);
  Vec anchor_action = policy(env.transition(s_prev, a, env.sample_noise()));
  // Running mean, exact when every sample maps to the same action.
  Vec mean(anchor_action.size(), 0.0);
  double count = 0.0;
  for (const Vec& s : sample_similar_states(env, s_prev, a, n)) {
    Vec out = policy(s);
    count += 1.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      mean[i] += (out[i] - mean[i]) / count;
    }
  }
  double d = l2_distance(anchor_action, mean);
  return d * d;
}

}  // namespace smooth
