#include "smooth/ppo/ppo.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "smooth/core/errors.h"
#include "smooth/core/io.h"

namespace smooth {
namespace {

Tensor gather_rows(const Tensor& m, std::span<const std::size_t> rows,
                   std::ptrdiff_t offset = 0) {
  const std::size_t cols = m.cols();
  Tensor out(Shape{rows.size(), cols});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t src = static_cast<std::size_t>(
        static_cast<std::ptrdiff_t>(rows[r]) + offset);
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = m.at(src, c);
  }
  return out;
}

Tensor gather_column(const std::vector<double>& v,
                     std::span<const std::size_t> rows) {
  Tensor out(Shape{rows.size(), 1});
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = v[rows[r]];
  return out;
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(what, 0, field);
}

}  // namespace

// ----- config -----

void PpoConfig::validate() const {
  require(n_envs > 0, "n_envs", "must be > 0");
  require(rollout_len >= 3, "rollout_len", "must be >= 3");
  require(epochs > 0, "epochs", "must be > 0");
  require(minibatch > 0, "minibatch", "must be > 0");
  require(clip > 0.0, "clip", "must be > 0");
  require(gamma > 0.0 && gamma <= 1.0, "gamma", "must be in (0, 1]");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda",
          "must be in [0, 1]");
  require(value_coef >= 0.0, "value_coef", "must be >= 0");
  require(entropy_coef >= 0.0, "entropy_coef", "must be >= 0");
  require(max_grad_norm > 0.0, "max_grad_norm", "must be > 0");
  require(lr > 0.0, "lr", "must be > 0");
  require(!hidden.empty(), "hidden", "needs at least one layer");
  for (std::size_t w : hidden) require(w > 0, "hidden", "widths must be > 0");
  require(std::isfinite(log_std_init), "log_std_init", "must be finite");
}

std::size_t PpoConfig::iterations() const {
  std::size_t per = steps_per_iteration();
  return static_cast<std::size_t>((total_steps + per - 1) / per);
}

// ----- GAE -----

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones,
                      double bootstrap_value, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw ContractError("compute_gae: rewards, values and dones differ in length");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t k = n; k-- > 0;) {
    double live = dones[k] ? 0.0 : 1.0;
    double delta = rewards[k] + gamma * next_value * live - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

// ----- buffer -----

RolloutBuffer::RolloutBuffer(std::size_t n_envs, std::size_t len,
                             std::size_t obs_dim, std::size_t action_dim)
    : n_envs_(n_envs),
      len_(len),
      states_(Shape{n_envs * len, obs_dim}),
      actions_(Shape{n_envs * len, action_dim}),
      pre_squash_(Shape{n_envs * len, action_dim}),
      log_probs_(n_envs * len),
      values_(n_envs * len),
      rewards_(n_envs * len),
      bootstrap_(n_envs),
      dones_(n_envs * len),
      advantages_(n_envs * len),
      returns_(n_envs * len),
      slot_(n_envs * len, npos) {}

void RolloutBuffer::store(std::size_t env, std::size_t t, const Vec& state,
                          const SampledAction& sample, double value,
                          double reward, bool done) {
  const std::size_t i = index(env, t);
  for (std::size_t c = 0; c < state.size(); ++c) states_.at(i, c) = state[c];
  for (std::size_t c = 0; c < sample.action.size(); ++c) {
    actions_.at(i, c) = sample.action[c];
    pre_squash_.at(i, c) = sample.pre_squash[c];
  }
  log_probs_[i] = sample.log_prob;
  values_[i] = value;
  rewards_[i] = reward;
  dones_[i] = done ? 1 : 0;
}

void RolloutBuffer::finalize(double gamma, double lambda, bool normalize) {
  for (std::size_t e = 0; e < n_envs_; ++e) {
    const std::size_t b = index(e, 0);
    GaeResult gae = compute_gae(
        std::span(rewards_).subspan(b, len_), std::span(values_).subspan(b, len_),
        std::span(dones_).subspan(b, len_), bootstrap_[e], gamma, lambda);
    std::copy(gae.advantages.begin(), gae.advantages.end(),
              advantages_.begin() + static_cast<std::ptrdiff_t>(b));
    std::copy(gae.returns.begin(), gae.returns.end(),
              returns_.begin() + static_cast<std::ptrdiff_t>(b));
  }
  if (normalize && advantages_.size() > 1) {
    double mean = std::accumulate(advantages_.begin(), advantages_.end(), 0.0) /
                  static_cast<double>(advantages_.size());
    double var = 0.0;
    for (double a : advantages_) var += (a - mean) * (a - mean);
    var /= static_cast<double>(advantages_.size());
    double sd = std::sqrt(var) + 1e-8;
    for (double& a : advantages_) a = (a - mean) / sd;
  }
  centers_.clear();
  std::fill(slot_.begin(), slot_.end(), npos);
  for (std::size_t e = 0; e < n_envs_; ++e) {
    for (std::size_t t = 1; t + 1 < len_; ++t) {
      const std::size_t i = index(e, t);
      if (dones_[i - 1] || dones_[i]) continue;
      slot_[i] = centers_.size();
      centers_.push_back(i);
    }
  }
}

TransitionTriple RolloutBuffer::triple(std::size_t center) const {
  if (center >= slot_.size() || slot_[center] == npos) {
    throw ContractError("no valid triple centered at this index");
  }
  TransitionTriple t;
  t.s_prev = states_.row(center - 1);
  t.a_prev = actions_.row(center - 1);
  t.s_cur = states_.row(center);
  t.a_cur = actions_.row(center);
  t.s_next = states_.row(center + 1);
  t.a_next = actions_.row(center + 1);
  t.reward = rewards_[center];
  t.valid = true;
  return t;
}

// ----- rollouts -----

RolloutCollector::RolloutCollector(const EnvFactory& factory,
                                   std::size_t n_envs,
                                   std::uint64_t base_seed,
                                   std::uint64_t action_seed)
    : episodes_(n_envs, 0), running_(n_envs, 0.0), base_seed_(base_seed) {
  for (std::size_t i = 0; i < n_envs; ++i) {
    envs_.push_back(factory());
    action_rngs_.push_back(Rng::derive(action_seed, i));
    states_.push_back(envs_.back()->reset(base_seed + i));
  }
}

void RolloutCollector::reset_env(std::size_t i) {
  ++episodes_[i];
  std::uint64_t seed = splitmix64((base_seed_ + i) ^ splitmix64(episodes_[i]));
  states_[i] = envs_[i]->reset(seed);
  running_[i] = 0.0;
}

void RolloutCollector::collect(const ActorNetwork& actor,
                               const CriticNetwork& critic, double gamma,
                               RolloutBuffer& buffer) {
  finished_.clear();
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    Environment& env = *envs_[e];
    for (std::size_t t = 0; t < buffer.len(); ++t) {
      const Vec& s = states_[e];
      SampledAction sample = actor.sample_action(s, action_rngs_[e]);
      double value = critic.value(s);
      StepResult r = env.step(s, sample.action);
      running_[e] += r.reward;
      double reward = r.reward;
      if (r.truncated && !r.terminated) {
        reward += gamma * critic.value(r.next_state);
      }
      bool done = r.terminated || r.truncated;
      buffer.store(e, t, s, sample, value, reward, done);
      if (done) {
        finished_.push_back(running_[e]);
        reset_env(e);
      } else {
        states_[e] = std::move(r.next_state);
      }
    }
    buffer.set_bootstrap(e, critic.value(states_[e]));
  }
}

// ----- learner -----

PpoLearner::PpoLearner(ActorNetwork& actor, CriticNetwork& critic,
                       const PpoConfig& config, const RegularizerSpec& spec)
    : actor_(&actor), critic_(&critic), config_(config), spec_(spec) {
  config_.validate();
  spec_.validate();
  for (const ParamRef& p : actor.parameters()) params_.push_back(p.tensor);
  for (const ParamRef& p : critic.parameters()) params_.push_back(p.tensor);
  std::vector<const Tensor*> view(params_.begin(), params_.end());
  adam_ = AdamState::for_params(view, AdamHyper{.lr = config_.lr});
}

std::vector<const Tensor*> PpoLearner::parameter_tensors() const {
  return {params_.begin(), params_.end()};
}

PpoLearner::Evaluation PpoLearner::evaluate(
    const RolloutBuffer& buffer, std::span<const std::size_t> indices,
    Rng& regularizer_rng) const {
  Graph g;
  BoundActor actor(g, *actor_);
  BoundCritic critic(g, *critic_);
  Evaluation out;
  UpdateStats& st = out.stats;

  Var states = g.constant(gather_rows(buffer.states(), indices));
  Var pre_mean = actor.pre_mean(actor.features(states));
  Var logp =
      actor.log_prob(pre_mean, gather_rows(buffer.pre_squash(), indices));
  Var ratio = g.exp(logp - g.constant(gather_column(buffer.log_probs(), indices)));
  Var adv = g.constant(gather_column(buffer.advantages(), indices));
  Var clipped = g.clamp(ratio, 1.0 - config_.clip, 1.0 + config_.clip);
  Var j_pi = -g.mean(g.minimum(ratio * adv, clipped * adv));
  Var value = critic.value(states);
  Var value_loss = g.mean(
      g.square(value - g.constant(gather_column(buffer.returns(), indices))));
  Var entropy = actor.gaussian_entropy();

  std::size_t outside = 0;
  for (double r : ratio.value().values()) {
    if (std::abs(r - 1.0) > config_.clip) ++outside;
  }
  st.clip_fraction = static_cast<double>(outside) / indices.size();

  RegularizerVars terms;
  std::vector<std::size_t> centers;
  for (std::size_t i : indices) {
    if (buffer.triple_slot(i) != RolloutBuffer::npos) centers.push_back(i);
  }
  const bool spatial = spec_.uses_spatial();
  const bool predict = spec_.uses_prediction();
  const bool temporal = spec_.uses_temporal();
  if (!centers.empty() && (spatial || predict || temporal)) {
    const Tensor& s = buffer.states();
    Var s_prev = g.constant(gather_rows(s, centers, -1));
    Var s_cur = g.constant(gather_rows(s, centers));
    auto s_next_tensor = [&] { return gather_rows(s, centers, 1); };
    std::optional<Var> f_prev, f_next, m_prev, m_next;
    Var f_cur = actor.features(s_cur);
    Var m_cur = actor.mean_from_features(f_cur);
    auto features_prev = [&] {
      if (!f_prev) f_prev = actor.features(s_prev);
      return *f_prev;
    };
    auto mean_next = [&] {
      if (!m_next) m_next = actor.mean(g.constant(s_next_tensor()));
      return *m_next;
    };
    if (spatial || predict) {
      switch (spec_.spatial) {
        case SpatialMethod::kAsap: {
          Var p_prev = actor.predict_from_features(features_prev());
          if (spatial) terms.spatial = asap_spatial_term(g, m_cur, p_prev);
          if (predict) terms.prediction = asap_prediction_term(g, p_prev, m_cur);
          break;
        }
        case SpatialMethod::kCapsGaussian: {
          Tensor similar = caps_similar_states(s_cur.value(), spec_.caps_sigma,
                                               regularizer_rng);
          terms.spatial = action_distance_term(
              g, m_cur, actor.mean(g.constant(std::move(similar))));
          break;
        }
        case SpatialMethod::kL2c2Interp: {
          std::vector<double> u(centers.size());
          for (double& x : u) x = regularizer_rng.uniform();
          Tensor similar = l2c2_similar_states(s_cur.value(), s_next_tensor(), u);
          terms.spatial = action_distance_term(
              g, m_cur, actor.mean(g.constant(std::move(similar))));
          break;
        }
        case SpatialMethod::kNone:
          break;
      }
    }
    if (temporal) {
      if (spec_.temporal == TemporalMethod::kGradCaps) {
        m_prev = actor.mean_from_features(features_prev());
        terms.temporal =
            grad_caps_term(g, *m_prev, m_cur, mean_next(), spec_.eps_t);
      } else {
        terms.temporal = caps_temporal_term(g, m_cur, mean_next());
      }
    }
  }

  Var total = assemble_policy_loss(g, j_pi, spec_, terms);
  if (config_.value_coef > 0.0) total = total + value_loss * config_.value_coef;
  if (config_.entropy_coef > 0.0) {
    total = total - entropy * config_.entropy_coef;
  }

  st.j_pi = j_pi.value().item();
  st.value_loss = value_loss.value().item();
  st.entropy = entropy.value().item();
  if (terms.spatial) st.l_s = terms.spatial->value().item();
  if (terms.prediction) st.l_p = terms.prediction->value().item();
  if (terms.temporal) st.l_t = terms.temporal->value().item();
  st.total = total.value().item();
  st.minibatches = 1;
  if (!std::isfinite(st.total)) {
    std::ostringstream msg;
    msg << "non-finite PPO loss: total=" << format_double(st.total)
        << " J_pi=" << format_double(st.j_pi)
        << " L_S=" << format_double(st.l_s)
        << " L_P=" << format_double(st.l_p)
        << " L_T=" << format_double(st.l_t)
        << " value_loss=" << format_double(st.value_loss)
        << " entropy=" << format_double(st.entropy);
    throw NumericError(msg.str());
  }

  g.backward(total);
  out.grads = actor.grads();
  for (Tensor& t : critic.grads()) out.grads.push_back(std::move(t));
  return out;
}

double PpoLearner::apply(std::vector<Tensor> grads) {
  double norm = clip_grad_norm(grads, config_.max_grad_norm);
  if (!std::isfinite(norm)) {
    throw NumericError("non-finite gradient norm " + format_double(norm));
  }
  adam_step(adam_, params_, grads);
  return norm;
}

UpdateStats PpoLearner::update(const RolloutBuffer& buffer, Rng& shuffle_rng,
                               Rng& regularizer_rng) {
  std::vector<std::size_t> order(buffer.size());
  std::iota(order.begin(), order.end(), 0);
  UpdateStats sum;
  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size();
         begin += config_.minibatch) {
      std::size_t end = std::min(order.size(), begin + config_.minibatch);
      std::span<const std::size_t> mb(order.data() + begin, end - begin);
      // Sorted so the gathered batch does not depend on shuffle order within
      // the minibatch.
      std::vector<std::size_t> sorted(mb.begin(), mb.end());
      std::sort(sorted.begin(), sorted.end());
      Evaluation ev = evaluate(buffer, sorted, regularizer_rng);
      ev.stats.grad_norm = apply(std::move(ev.grads));
      sum.j_pi += ev.stats.j_pi;
      sum.l_s += ev.stats.l_s;
      sum.l_p += ev.stats.l_p;
      sum.l_t += ev.stats.l_t;
      sum.value_loss += ev.stats.value_loss;
      sum.entropy += ev.stats.entropy;
      sum.grad_norm += ev.stats.grad_norm;
      sum.clip_fraction += ev.stats.clip_fraction;
      sum.total += ev.stats.total;
      ++sum.minibatches;
    }
  }
  if (sum.minibatches > 0) {
    double n = static_cast<double>(sum.minibatches);
    for (double* f : {&sum.j_pi, &sum.l_s, &sum.l_p, &sum.l_t,
                      &sum.value_loss, &sum.entropy, &sum.grad_norm,
                      &sum.clip_fraction, &sum.total}) {
      *f /= n;
    }
  }
  return sum;
}

// ----- training loop -----

std::string metrics_csv_header() {
  return "iteration,steps,mean_return,J_pi,L_S,L_P,L_T,value_loss,entropy,"
         "grad_norm";
}

std::string metrics_csv_row(const IterationRecord& r) {
  std::ostringstream out;
  out << r.iteration << ',' << r.steps << ',' << format_double(r.mean_return)
      << ',' << format_double(r.stats.j_pi) << ','
      << format_double(r.stats.l_s) << ',' << format_double(r.stats.l_p) << ','
      << format_double(r.stats.l_t) << ','
      << format_double(r.stats.value_loss) << ','
      << format_double(r.stats.entropy) << ','
      << format_double(r.stats.grad_norm);
  return out.str();
}

SeedStreams SeedStreams::from(std::uint64_t seed) {
  std::uint64_t root = splitmix64(seed);
  return {splitmix64(root ^ 0x01), splitmix64(root ^ 0x02),
          splitmix64(root ^ 0x03), splitmix64(root ^ 0x04)};
}

void train(const EnvFactory& factory, ActorNetwork& actor,
           CriticNetwork& critic, const RegularizerSpec& spec,
           const PpoConfig& config, const MetricsSink& sink) {
  config.validate();
  spec.validate();
  const std::size_t iterations = config.iterations();
  if (iterations == 0) return;
  SeedStreams seeds = SeedStreams::from(config.seed);
  RolloutCollector collector(factory, config.n_envs, seeds.env_base,
                             seeds.actions);
  PpoLearner learner(actor, critic, config, spec);
  Rng shuffle_rng(seeds.shuffle);
  Rng regularizer_rng(seeds.regularizer);
  RolloutBuffer buffer(config.n_envs, config.rollout_len, actor.obs_dim(),
                       actor.action_dim());
  for (std::size_t it = 0; it < iterations; ++it) {
    collector.collect(actor, critic, config.gamma, buffer);
    buffer.finalize(config.gamma, config.gae_lambda,
                    config.normalize_advantages);
    IterationRecord record;
    record.iteration = it + 1;
    record.steps = (it + 1) * config.steps_per_iteration();
    const std::vector<double>& done = collector.finished_returns();
    record.mean_return =
        done.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : std::accumulate(done.begin(), done.end(), 0.0) /
                           static_cast<double>(done.size());
    record.stats = learner.update(buffer, shuffle_rng, regularizer_rng);
    if (sink) sink(record);
  }
}

ActorNetwork make_actor(const Environment& env, const PpoConfig& config) {
  ActorConfig c;
  c.obs_dim = env.state_dim();
  c.action_dim = env.action_dim();
  c.hidden = config.hidden;
  c.action_low = env.action_low();
  c.action_high = env.action_high();
  c.log_std_init = config.log_std_init;
  Rng rng = Rng::derive(config.seed, 0xac70);
  return ActorNetwork(c, rng);
}

CriticNetwork make_critic(const Environment& env, const PpoConfig& config) {
  CriticConfig c;
  c.obs_dim = env.state_dim();
  c.hidden = config.hidden;
  Rng rng = Rng::derive(config.seed, 0xc417);
  return CriticNetwork(c, rng);
}

}  // namespace smooth
