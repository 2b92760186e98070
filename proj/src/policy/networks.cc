#include "smooth/policy/networks.h"

#include <cmath>
#include <numbers>

#include "smooth/core/errors.h"

namespace smooth {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

std::pair<Var, Var> bind_linear(Graph& g, const Linear& layer,
                                std::vector<Var>& params) {
  Var w = g.leaf(layer.weight);
  Var b = g.leaf(layer.bias);
  params.push_back(w);
  params.push_back(b);
  return {w, b};
}

Var apply(Graph& g, const std::pair<Var, Var>& layer, Var x) {
  return g.matmul(x, layer.first) + layer.second;
}

void check_state(const Vec& state, std::size_t dim) {
  if (state.size() != dim) {
    throw ShapeError("state has " + std::to_string(state.size()) +
                     " entries, network expects " + std::to_string(dim));
  }
  for (double x : state) {
    if (!std::isfinite(x)) throw NumericError("non-finite state entry");
  }
}

void check_finite_output(const Tensor& t, const char* what) {
  if (!t.all_finite()) {
    throw NumericError(std::string("non-finite ") + what + " output");
  }
}

}  // namespace

const char* group_name(ParamGroup group) {
  switch (group) {
    case ParamGroup::kTrunk: return "trunk";
    case ParamGroup::kActionHead: return "action_head";
    case ParamGroup::kLogStd: return "log_std";
    case ParamGroup::kPredictionHead: return "prediction_head";
    case ParamGroup::kCritic: return "critic";
  }
  return "unknown";
}

Linear Linear::init(std::size_t in, std::size_t out, double gain, Rng& rng) {
  Linear layer{Tensor(Shape{in, out}), Tensor(Shape{out}, 0.0)};
  const double scale = gain / std::sqrt(static_cast<double>(in));
  for (double& w : layer.weight.data()) w = scale * rng.normal();
  return layer;
}

Tensor stack_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const Vec& r : rows) {
    if (r.size() != cols) throw ShapeError("stack_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor::matrix(rows.size(), cols, std::move(data));
}

double squash_log_det(const Vec& pre_squash, const Vec& half_range) {
  double total = 0.0;
  for (std::size_t i = 0; i < pre_squash.size(); ++i) {
    double u = pre_squash[i];
    // log(1 - tanh(u)^2), stable for large |u|.
    double log_sech2 = 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
    total += std::log(half_range[i]) + log_sech2;
  }
  return total;
}

// ----- ActorNetwork -----

void ActorConfig::validate() const {
  if (obs_dim == 0 || action_dim == 0) {
    throw ContractError("actor needs positive observation and action dims");
  }
  if (action_low.size() != action_dim || action_high.size() != action_dim) {
    throw ContractError("actor action bounds must match action_dim");
  }
  for (std::size_t i = 0; i < action_dim; ++i) {
    if (!(action_low[i] < action_high[i])) {
      throw ContractError("actor action bounds are degenerate");
    }
  }
  if (hidden.empty()) throw ContractError("actor needs hidden layers");
}

ActorNetwork::ActorNetwork(ActorConfig config, Rng& rng)
    : config_(std::move(config)) {
  config_.validate();
  std::size_t in = config_.obs_dim;
  for (std::size_t width : config_.hidden) {
    trunk.push_back(Linear::init(in, width, 1.0, rng));
    in = width;
  }
  action_head =
      Linear::init(in, config_.action_dim, config_.head_init_scale, rng);
  prediction_head =
      Linear::init(in, config_.action_dim, config_.head_init_scale, rng);
  log_std = Tensor(Shape{config_.action_dim}, config_.log_std_init);
  for (std::size_t i = 0; i < config_.action_dim; ++i) {
    center_.push_back(0.5 * (config_.action_high[i] + config_.action_low[i]));
    half_range_.push_back(0.5 *
                          (config_.action_high[i] - config_.action_low[i]));
  }
}

std::vector<ParamRef> ActorNetwork::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < trunk.size(); ++i) {
    std::string prefix = "trunk." + std::to_string(i);
    out.push_back({prefix + ".weight", ParamGroup::kTrunk, &trunk[i].weight});
    out.push_back({prefix + ".bias", ParamGroup::kTrunk, &trunk[i].bias});
  }
  out.push_back({"action_head.weight", ParamGroup::kActionHead,
                 &action_head.weight});
  out.push_back({"action_head.bias", ParamGroup::kActionHead,
                 &action_head.bias});
  out.push_back({"log_std", ParamGroup::kLogStd, &log_std});
  out.push_back({"prediction_head.weight", ParamGroup::kPredictionHead,
                 &prediction_head.weight});
  out.push_back({"prediction_head.bias", ParamGroup::kPredictionHead,
                 &prediction_head.bias});
  return out;
}

std::vector<const Tensor*> ActorNetwork::parameter_tensors() const {
  std::vector<const Tensor*> out;
  for (const ParamRef& p : const_cast<ActorNetwork*>(this)->parameters()) {
    out.push_back(p.tensor);
  }
  return out;
}

std::size_t ActorNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : parameter_tensors()) n += t->size();
  return n;
}

Tensor ActorNetwork::act_mean(const Tensor& states) const {
  Graph g(false);
  BoundActor bound(g, *this);
  Tensor out = bound.mean(g.constant(states)).value();
  check_finite_output(out, "act_mean");
  return out;
}

Vec ActorNetwork::act_mean(const Vec& state) const {
  check_state(state, obs_dim());
  return act_mean(Tensor::matrix(1, state.size(), state)).values();
}

Tensor ActorNetwork::predict_next_mean(const Tensor& states) const {
  Graph g(false);
  BoundActor bound(g, *this);
  Tensor out = bound.predict(g.constant(states)).value();
  check_finite_output(out, "predict_next_mean");
  return out;
}

Vec ActorNetwork::predict_next_mean(const Vec& state) const {
  check_state(state, obs_dim());
  return predict_next_mean(Tensor::matrix(1, state.size(), state)).values();
}

SampledAction ActorNetwork::sample_action(const Vec& state, Rng& rng) const {
  check_state(state, obs_dim());
  Graph g(false);
  BoundActor bound(g, *this);
  Var pre = bound.pre_mean(
      bound.features(g.constant(Tensor::matrix(1, state.size(), state))));
  const Tensor& mu = pre.value();
  SampledAction out;
  double gauss = 0.0;
  for (std::size_t i = 0; i < action_dim(); ++i) {
    double z = rng.normal();
    double u = mu[i] + std::exp(log_std[i]) * z;
    out.pre_squash.push_back(u);
    out.action.push_back(center_[i] + half_range_[i] * std::tanh(u));
    gauss += -0.5 * z * z - log_std[i] - 0.5 * kLog2Pi;
  }
  out.log_prob = gauss - squash_log_det(out.pre_squash, half_range_);
  if (!std::isfinite(out.log_prob)) {
    throw NumericError("non-finite log probability");
  }
  return out;
}

MeanPolicy ActorNetwork::mean_policy() const {
  return [this](const Vec& s) { return act_mean(s); };
}

// ----- CriticNetwork -----

CriticNetwork::CriticNetwork(CriticConfig config, Rng& rng)
    : config_(std::move(config)) {
  if (config_.obs_dim == 0) throw ContractError("critic needs obs_dim > 0");
  std::size_t in = config_.obs_dim;
  for (std::size_t width : config_.hidden) {
    layers.push_back(Linear::init(in, width, 1.0, rng));
    in = width;
  }
  layers.push_back(Linear::init(in, 1, 1.0, rng));
}

std::vector<ParamRef> CriticNetwork::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::string prefix = "critic." + std::to_string(i);
    out.push_back({prefix + ".weight", ParamGroup::kCritic, &layers[i].weight});
    out.push_back({prefix + ".bias", ParamGroup::kCritic, &layers[i].bias});
  }
  return out;
}

std::vector<const Tensor*> CriticNetwork::parameter_tensors() const {
  std::vector<const Tensor*> out;
  for (const Linear& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

Tensor CriticNetwork::value(const Tensor& states) const {
  Graph g(false);
  BoundCritic bound(g, *this);
  Tensor out = bound.value(g.constant(states)).value();
  check_finite_output(out, "critic");
  return out;
}

double CriticNetwork::value(const Vec& state) const {
  check_state(state, config_.obs_dim);
  return value(Tensor::matrix(1, state.size(), state))[0];
}

// ----- BoundActor -----

BoundActor::BoundActor(Graph& graph, const ActorNetwork& actor)
    : graph_(&graph), actor_(&actor) {
  for (const Linear& layer : actor.trunk) {
    trunk_.push_back(bind_linear(graph, layer, params_));
  }
  action_head_ = bind_linear(graph, actor.action_head, params_);
  log_std_ = graph.leaf(actor.log_std);
  params_.push_back(log_std_);
  prediction_head_ = bind_linear(graph, actor.prediction_head, params_);
  center_ = graph.constant(Tensor::vector(actor.center()));
  half_range_ = graph.constant(Tensor::vector(actor.half_range()));
}

Var BoundActor::features(Var states) const {
  Var h = states;
  for (const auto& layer : trunk_) h = graph_->tanh(apply(*graph_, layer, h));
  return h;
}

Var BoundActor::pre_mean(Var features) const {
  return apply(*graph_, action_head_, features);
}

Var BoundActor::squash(Var pre) const {
  return graph_->tanh(pre) * half_range_ + center_;
}

Var BoundActor::predict_from_features(Var features) const {
  return squash(apply(*graph_, prediction_head_, features));
}

Var BoundActor::log_prob(Var pre_mean, const Tensor& pre_squash) const {
  Graph& g = *graph_;
  const std::size_t rows = pre_squash.rows();
  const std::size_t dims = pre_squash.cols();
  Var z = (g.constant(pre_squash) - pre_mean) / g.exp(log_std_);
  Var quad = g.row_sum(g.square(z)) * -0.5;
  Tensor correction(Shape{rows, 1});
  for (std::size_t r = 0; r < rows; ++r) {
    correction[r] = squash_log_det(pre_squash.row(r), actor_->half_range()) +
                    0.5 * kLog2Pi * static_cast<double>(dims);
  }
  return quad - g.sum(log_std_) - g.constant(std::move(correction));
}

Var BoundActor::gaussian_entropy() const {
  double dims = static_cast<double>(actor_->action_dim());
  return graph_->sum(log_std_) + 0.5 * (1.0 + kLog2Pi) * dims;
}

PolicyHeads BoundActor::heads() const {
  return {[this](Var s) { return mean(s); },
          [this](Var s) { return predict(s); }};
}

std::vector<Tensor> BoundActor::grads() const {
  std::vector<Tensor> out;
  for (Var v : params_) out.push_back(graph_->grad(v));
  return out;
}

// ----- BoundCritic -----

BoundCritic::BoundCritic(Graph& graph, const CriticNetwork& critic)
    : graph_(&graph) {
  for (const Linear& layer : critic.layers) {
    params_.push_back(graph.leaf(layer.weight));
    params_.push_back(graph.leaf(layer.bias));
  }
}

Var BoundCritic::value(Var states) const {
  Var h = states;
  for (std::size_t i = 0; i + 1 < params_.size(); i += 2) {
    h = graph_->matmul(h, params_[i]) + params_[i + 1];
    if (i + 2 < params_.size()) h = graph_->tanh(h);
  }
  return h;
}

std::vector<Tensor> BoundCritic::grads() const {
  std::vector<Tensor> out;
  for (Var v : params_) out.push_back(graph_->grad(v));
  return out;
}

}  // namespace smooth
