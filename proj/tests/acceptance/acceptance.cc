// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.
//
//   acceptance --smoothctl <path> --configs <dir> --work <dir> [--only N]...

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smooth/core/io.h"
#include "smooth/core/rng.h"
#include "smooth/core/runtime.h"
#include "smooth/harness/commands.h"
#include "smooth/harness/config.h"
#include "smooth/harness/experiment.h"
#include "smooth/metrics/probes.h"
#include "smooth/metrics/spectrum.h"
#include "smooth/policy/checkpoint.h"
#include "smooth/ppo/ppo.h"
#include "smooth/smoothing/regularizers.h"

namespace smooth {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Context {
  fs::path smoothctl;
  fs::path configs;
  fs::path work;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream o;
  o.precision(precision);
  o << x;
  return o.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ----- 1: gradients -----

struct FdError {
  double max_rel = 0.0;
  double max_abs_small = 0.0;
  std::size_t checked = 0;
};

// Central differences of `value` against `analytic`, both over `params`.
FdError finite_difference(const std::vector<Tensor*>& params,
                          const std::vector<Tensor>& analytic,
                          const std::function<double()>& value,
                          std::size_t first, std::size_t last) {
  constexpr double h = 1e-5;
  FdError err;
  for (std::size_t k = first; k < last; ++k) {
    Tensor& p = *params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      double saved = p[i];
      p[i] = saved + h;
      double plus = value();
      p[i] = saved - h;
      double minus = value();
      p[i] = saved;
      double numeric = (plus - minus) / (2.0 * h);
      double a = analytic[k][i];
      double scale = std::max(std::abs(a), std::abs(numeric));
      ++err.checked;
      if (scale > 1e-6) {
        err.max_rel = std::max(err.max_rel, std::abs(a - numeric) / scale);
      } else {
        err.max_abs_small =
            std::max(err.max_abs_small, std::abs(a - numeric));
      }
    }
  }
  return err;
}

struct TermCase {
  std::string name;
  RegularizerSpec spec;
  double UpdateStats::*field;
};

Outcome gradient_correctness() {
  constexpr double kRelTol = 1e-4;
  constexpr double kAbsTol = 1e-9;
  std::vector<TermCase> terms;
  auto add = [&](std::string name, SpatialMethod s, TemporalMethod t,
                 double ls, double lp, double lt, double UpdateStats::*f) {
    RegularizerSpec spec;
    spec.spatial = s;
    spec.temporal = t;
    spec.lambda_s = ls;
    spec.lambda_p = lp;
    spec.lambda_t = lt;
    terms.push_back({std::move(name), spec, f});
  };
  using S = SpatialMethod;
  using T = TemporalMethod;
  add("L_S", S::kAsap, T::kNone, 1, 0, 0, &UpdateStats::l_s);
  add("L_P", S::kAsap, T::kNone, 0, 1, 0, &UpdateStats::l_p);
  add("L_T", S::kNone, T::kGradCaps, 0, 0, 1, &UpdateStats::l_t);
  add("caps_spatial", S::kCapsGaussian, T::kNone, 1, 0, 0, &UpdateStats::l_s);
  add("caps_temporal", S::kNone, T::kCapsFirstOrder, 0, 0, 1,
      &UpdateStats::l_t);
  add("l2c2", S::kL2c2Interp, T::kNone, 1, 0, 0, &UpdateStats::l_s);

  struct EnvCase {
    std::string name;
    std::vector<std::size_t> hidden;
  };
  std::vector<EnvCase> envs{{"point_mass", {8}},
                            {"pendulum", {8}},
                            {"reacher", {6, 6}}};
  std::map<std::string, double> worst;
  double worst_abs = 0.0;
  std::size_t max_params = 0;
  std::size_t checked = 0;
  for (const EnvCase& ec : envs) {
    EnvFactory factory = [name = ec.name] {
      return make_environment(name, {{"horizon", 12}});
    };
    PpoConfig cfg;
    cfg.n_envs = 2;
    cfg.rollout_len = 24;
    cfg.hidden = ec.hidden;
    cfg.seed = 11;
    cfg.value_coef = 0.0;
    std::unique_ptr<Environment> env = factory();
    ActorNetwork actor = make_actor(*env, cfg);
    CriticNetwork critic = make_critic(*env, cfg);
    // Non-trivial heads so ratios move away from 1 and some clip.
    Rng noise(5);
    for (const ParamRef& p : actor.parameters()) {
      for (double& x : p.tensor->data()) x += 0.3 * noise.normal();
    }
    RolloutBuffer buffer(cfg.n_envs, cfg.rollout_len, actor.obs_dim(),
                         actor.action_dim());
    RolloutCollector collector(factory, cfg.n_envs, 1, 2);
    collector.collect(actor, critic, cfg.gamma, buffer);
    buffer.finalize(cfg.gamma, cfg.gae_lambda, true);
    for (const ParamRef& p : actor.parameters()) {
      for (double& x : p.tensor->data()) x += 0.1 * noise.normal();
    }
    std::vector<std::size_t> indices(buffer.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    std::vector<Tensor*> params;
    for (const ParamRef& p : actor.parameters()) params.push_back(p.tensor);
    const std::size_t n_actor = params.size();
    for (const ParamRef& p : critic.parameters()) params.push_back(p.tensor);
    std::size_t n_params = actor.parameter_count();
    for (const Tensor* t : critic.parameter_tensors()) n_params += t->size();
    max_params = std::max(max_params, n_params);

    auto run = [&](const PpoConfig& c, const RegularizerSpec& spec) {
      PpoLearner learner(actor, critic, c, spec);
      Rng rng(77);
      return learner.evaluate(buffer, indices, rng);
    };
    auto record = [&](const std::string& name, const FdError& e) {
      worst[name] = std::max(worst[name], e.max_rel);
      worst_abs = std::max(worst_abs, e.max_abs_small);
      checked += e.checked;
    };

    // Surrogate: with no regularizer and no value term, the actor gradient
    // is exactly dJ/dtheta.
    RegularizerSpec none;
    PpoLearner::Evaluation base = run(cfg, none);
    record("J_pi", finite_difference(
                       params, base.grads,
                       [&] { return run(cfg, none).stats.j_pi; }, 0, n_actor));

    // Value loss only reaches the critic.
    PpoConfig vcfg = cfg;
    vcfg.value_coef = 1.0;
    PpoLearner::Evaluation with_value = run(vcfg, none);
    record("value", finite_difference(
                        params, with_value.grads,
                        [&] { return run(vcfg, none).stats.value_loss; },
                        n_actor, params.size()));

    // Each regularizer alone at weight 1; its gradient is the difference to
    // the surrogate gradient.
    // L_S and L_P detach one side. Differencing the loss value would move
    // the detached side too, so their oracle freezes it at the current
    // parameters: L_S = mean |mu(s_t) - P0|^2, L_P = mean |P(s_{t-1}) - mu0|^2.
    std::vector<std::size_t> centers = buffer.triple_centers();
    std::vector<Vec> prev_rows, cur_rows;
    for (std::size_t c : centers) {
      prev_rows.push_back(buffer.states().row(c - 1));
      cur_rows.push_back(buffer.states().row(c));
    }
    Tensor s_prev = stack_rows(prev_rows);
    Tensor s_cur = stack_rows(cur_rows);
    auto mean_sq = [](const Tensor& a, const Tensor& b) {
      double sum = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        sum += (a[i] - b[i]) * (a[i] - b[i]);
      }
      return sum / static_cast<double>(a.rows());
    };
    const Tensor frozen_pred = actor.predict_next_mean(s_prev);
    const Tensor frozen_mean = actor.act_mean(s_cur);
    std::map<std::string, std::function<double()>> frozen{
        {"L_S", [&] { return mean_sq(actor.act_mean(s_cur), frozen_pred); }},
        {"L_P",
         [&] { return mean_sq(actor.predict_next_mean(s_prev), frozen_mean); }},
    };

    for (const TermCase& t : terms) {
      PpoLearner::Evaluation with = run(cfg, t.spec);
      std::vector<Tensor> diff;
      for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor d = with.grads[k];
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= base.grads[k][i];
        diff.push_back(std::move(d));
      }
      std::function<double()> value = [&] {
        return run(cfg, t.spec).stats.*(t.field);
      };
      if (auto it = frozen.find(t.name); it != frozen.end()) {
        // Same value at the current parameters, so the two agree there.
        if (std::abs(it->second() - with.stats.*(t.field)) >
            1e-12 * std::max(1.0, std::abs(with.stats.*(t.field)))) {
          worst[t.name + " value"] = 1.0;
        }
        value = it->second;
      }
      record(t.name, finite_difference(params, diff, value, 0, n_actor));
    }
  }
  Outcome out;
  out.pass = max_params <= 200 && worst_abs <= kAbsTol;
  std::ostringstream d;
  d << "max rel error:";
  for (const auto& [name, e] : worst) {
    d << " " << name << "=" << fmt(e, 2);
    if (!(e <= kRelTol)) out.pass = false;
  }
  d << "; " << checked << " entries, <= " << max_params
    << " params per network, max abs error on tiny entries " << fmt(worst_abs, 2);
  out.detail = d.str();
  return out;
}

// ----- 2: stop gradients -----

bool all_zero(const Tensor& t) {
  for (double x : t.values()) {
    if (x != 0.0) return false;
  }
  return true;
}

bool any_nonzero(const Tensor& t) { return !all_zero(t); }

Outcome stop_gradients() {
  std::size_t violations = 0;
  std::size_t live = 0;
  constexpr std::size_t kBatches = 100;
  for (std::size_t b = 0; b < kBatches; ++b) {
    Rng rng(1000 + b);
    ActorConfig ac;
    ac.obs_dim = 3;
    ac.action_dim = 2;
    ac.hidden = {8, 8};
    ac.action_low = {-1.0, -2.0};
    ac.action_high = {1.0, 2.0};
    ac.head_init_scale = 1.0;
    ActorNetwork actor(ac, rng);
    const std::size_t rows = 1 + rng.below(32);
    auto random_states = [&] {
      Tensor t = Tensor::matrix(rows, 3, std::vector<double>(rows * 3));
      for (double& x : t.data()) x = rng.normal();
      return t;
    };
    TripleBatch batch{random_states(), random_states(), random_states()};
    // Parameter order: trunk (2 per layer), action head, log_std, prediction
    // head.
    const std::size_t a_w = 2 * ac.hidden.size();
    const std::size_t p_w = a_w + 3;
    for (int which = 0; which < 2; ++which) {
      Graph g;
      BoundActor bound(g, actor);
      Var loss = which == 0 ? loss_asap_spatial(g, bound.heads(), batch)
                            : loss_asap_pred(g, bound.heads(), batch);
      g.backward(loss);
      std::vector<Tensor> grads = bound.grads();
      // L_S must not move the prediction head; L_P must not move the action
      // head. The other head does get a gradient.
      std::size_t blocked = which == 0 ? p_w : a_w;
      std::size_t open = which == 0 ? a_w : p_w;
      if (!all_zero(grads[blocked]) || !all_zero(grads[blocked + 1])) {
        ++violations;
      }
      if (any_nonzero(grads[open])) ++live;
    }
  }
  Outcome out;
  out.pass = violations == 0 && live == 2 * kBatches;
  out.detail = std::to_string(kBatches) + " batches, " +
               std::to_string(violations) +
               " nonzero blocked-head gradients, " + std::to_string(live) +
               "/" + std::to_string(2 * kBatches) +
               " losses with a live gradient on the other head";
  return out;
}

// ----- 3: zero weights are plain PPO -----

std::vector<std::string> trajectory(const RegularizerSpec& spec,
                                    const PpoConfig& config) {
  EnvFactory factory = [] { return make_environment("pendulum", {}); };
  std::unique_ptr<Environment> env = factory();
  ActorNetwork actor = make_actor(*env, config);
  CriticNetwork critic = make_critic(*env, config);
  std::vector<std::string> hashes;
  train(factory, actor, critic, spec, config, [&](const IterationRecord&) {
    std::vector<const Tensor*> all = actor.parameter_tensors();
    for (const Tensor* t : critic.parameter_tensors()) all.push_back(t);
    hashes.push_back(parameter_hash(all));
  });
  return hashes;
}

Outcome zero_weight_reduction() {
  PpoConfig c;
  c.n_envs = 2;
  c.rollout_len = 128;
  c.epochs = 2;
  c.minibatch = 64;
  c.hidden = {16, 16};
  c.seed = 3;
  c.total_steps = 20 * c.steps_per_iteration();
  std::vector<std::string> plain = trajectory(RegularizerSpec{}, c);
  std::size_t mismatched = 0;
  std::size_t variants = 0;
  for (SpatialMethod s : {SpatialMethod::kAsap, SpatialMethod::kCapsGaussian,
                          SpatialMethod::kL2c2Interp}) {
    for (TemporalMethod t :
         {TemporalMethod::kGradCaps, TemporalMethod::kCapsFirstOrder}) {
      RegularizerSpec spec;
      spec.spatial = s;
      spec.temporal = t;
      spec.lambda_s = spec.lambda_p = spec.lambda_t = 0.0;
      ++variants;
      if (trajectory(spec, c) != plain) ++mismatched;
    }
  }
  // Control: a live ASAP term does change the trajectory.
  RegularizerSpec live;
  live.spatial = SpatialMethod::kAsap;
  live.temporal = TemporalMethod::kGradCaps;
  bool differs = trajectory(live, c) != plain;
  Outcome out;
  out.pass = plain.size() == 20 && mismatched == 0 && differs;
  out.detail = std::to_string(plain.size()) + " updates, " +
               std::to_string(variants - mismatched) + "/" +
               std::to_string(variants) +
               " zero-weight variants bit-identical to plain PPO; active ASAP " +
               (differs ? "diverges" : "does NOT diverge");
  return out;
}

// ----- 4: similar-state bound via the CLI -----

int run_command(const std::string& cmd) {
  int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

Outcome similar_state_suite(const Context& ctx) {
  std::string base = "\"" + ctx.smoothctl.string() + "\" verify ";
  std::ostringstream d;
  bool pass = true;
  for (const char* env : {"point_mass", "pendulum", "reacher"}) {
    int code = run_command(base + env + " --anchors 100 --samples 10000");
    d << env << " exit " << code << ", ";
    pass = pass && code == 0;
  }
  int misdeclared = run_command(
      base + "point_mass --set k_xi=0.1 --anchors 100 --samples 10000");
  d << "k_xi=0.1 fixture exit " << misdeclared;
  pass = pass && misdeclared == 1;
  return {pass, d.str()};
}

// ----- 5: FFT and Sm -----

std::vector<double> direct_dft(const std::vector<double>& x) {
  std::size_t n = next_power_of_two(x.size());
  std::vector<double> out;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> sum = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      double angle = -2.0 * std::numbers::pi *
                     static_cast<double>(k * t % n) / static_cast<double>(n);
      sum += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out.push_back(std::abs(sum));
  }
  return out;
}

std::vector<double> tone(std::size_t n, std::size_t bin) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = std::cos(2.0 * std::numbers::pi * static_cast<double>(bin * t) /
                    static_cast<double>(n));
  }
  return x;
}

Outcome metric_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t len = 2 + rng.below(255);
    std::vector<double> x(len);
    for (double& v : x) v = rng.normal();
    Spectrum s = dft_magnitudes(x, 10.0);
    std::vector<double> ref = direct_dft(x);
    if (s.magnitudes.size() != ref.size()) return {false, "bin count mismatch"};
    for (std::size_t k = 0; k < ref.size(); ++k) {
      worst = std::max(worst, std::abs(s.magnitudes[k] - ref[k]));
    }
  }
  double worst_const = 0.0;
  for (std::size_t len : {8, 16, 40, 200, 256}) {
    for (double c : {0.0, 0.7, -1.3}) {
      std::vector<double> x(len, c);
      worst_const = std::max(worst_const, std::abs(smoothness(x, 20.0)));
    }
  }
  // Bin-aligned unit tones on N = 256: Sm = k / n exactly, so it grows
  // linearly with the bin.
  const std::size_t n = 256;
  double worst_linear = 0.0;
  bool monotone = true;
  double prev = 0.0;
  double first = smoothness(tone(n, 1), 20.0);
  for (std::size_t k = 1; k < n / 2; ++k) {
    double sm = smoothness(tone(n, k), 20.0);
    if (sm <= prev) monotone = false;
    prev = sm;
    worst_linear = std::max(
        worst_linear, std::abs(sm / first - static_cast<double>(k)) /
                          static_cast<double>(k));
  }
  Outcome out;
  out.pass = worst <= 1e-9 && worst_const == 0.0 && monotone &&
             worst_linear <= 0.01;
  out.detail = "max |FFT - DFT| " + fmt(worst, 2) + " over 200 trials, Sm(const) " +
               fmt(worst_const, 2) + ", tones " +
               (monotone ? "monotone" : "NOT monotone") +
               ", max deviation from linear " + fmt(100 * worst_linear, 2) + "%";
  return out;
}

// ----- 6-9: training runs -----

struct MethodRuns {
  ExperimentConfig config;
  std::vector<RunRecord> records;
  double seconds = 0.0;
};

ExperimentConfig acceptance_config(const Context& ctx, const std::string& file) {
  ExperimentConfig c = load_config(ctx.configs / file);
  c.output = ctx.work / "runs";
  return c;
}

class Runs {
 public:
  explicit Runs(const Context& ctx) : ctx_(ctx) {}

  const MethodRuns& get(const std::string& file) {
    auto it = cache_.find(file);
    if (it != cache_.end()) return it->second;
    MethodRuns m;
    m.config = acceptance_config(ctx_, file);
    Clock::time_point start = Clock::now();
    m.records = run_experiment(m.config, worker_threads());
    m.seconds = seconds_since(start);
    std::cout << "  trained " << m.config.name << " on " << m.config.env_name
              << ": " << m.records.size() << " seeds in " << fmt(m.seconds, 3)
              << " s" << std::endl;
    return cache_.emplace(file, std::move(m)).first->second;
  }

 private:
  const Context& ctx_;
  std::map<std::string, MethodRuns> cache_;
};

MethodSummary summary_of(const MethodRuns& m) {
  return summarize(m.records, m.config.name).at(0);
}

std::string describe(const MethodSummary& s) {
  return s.name + " re " + fmt(s.return_mean, 5) + " (" + fmt(s.return_std, 3) +
         ") sm " + fmt(s.sm_mean, 4) + " (" + fmt(s.sm_std, 3) + ")";
}

bool return_kept(double base, double method) {
  return method >= base - 0.1 * std::abs(base);
}

constexpr double kBudgetSeconds = 30 * 60;
constexpr std::uint64_t kMaxSteps = 200000;

Outcome directional_reduction(Runs& runs) {
  Outcome out{true, ""};
  double seconds = 0.0;
  std::ostringstream d;
  for (const auto& [env, base_file, asap_file] :
       {std::tuple{"pendulum", "pendulum_base.ini", "pendulum_asap.ini"},
        std::tuple{"point_mass", "point_mass_base.ini",
                   "point_mass_asap.ini"}}) {
    const MethodRuns& base = runs.get(base_file);
    const MethodRuns& asap = runs.get(asap_file);
    seconds += base.seconds + asap.seconds;
    MethodSummary b = summary_of(base);
    MethodSummary a = summary_of(asap);
    double reduction = sm_reduction_percent(b.sm_mean, a.sm_mean);
    bool ok = b.failed == 0 && a.failed == 0 && b.runs == 5 && a.runs == 5 &&
              reduction >= 20.0 && return_kept(b.return_mean, a.return_mean) &&
              base.config.ppo.total_steps <= kMaxSteps &&
              asap.config.ppo.total_steps <= kMaxSteps;
    out.pass = out.pass && ok;
    d << env << ": " << describe(b) << " vs " << describe(a) << ", sm -"
      << fmt(reduction, 3) << "%" << (ok ? "" : " [fails]") << "; ";
  }
  out.pass = out.pass && seconds <= kBudgetSeconds;
  d << "runtime " << fmt(seconds, 4) << " s";
  out.detail = d.str();
  return out;
}

Outcome ablation(Runs& runs) {
  const MethodRuns& asap = runs.get("pendulum_asap.ini");
  const MethodRuns& gc = runs.get("pendulum_grad_caps.ini");
  MethodSummary a = summary_of(asap);
  MethodSummary g = summary_of(gc);
  Outcome out;
  out.pass = a.failed == 0 && g.failed == 0 && a.runs == 5 && g.runs == 5 &&
             a.sm_mean <= g.sm_mean && gc.seconds <= kBudgetSeconds &&
             gc.config.ppo.total_steps <= kMaxSteps;
  out.detail = "pendulum: " + describe(g) + " vs " + describe(a) +
               ", grad_caps-only runtime " + fmt(gc.seconds, 4) + " s";
  return out;
}

Outcome composite_probe(Runs& runs) {
  const MethodRuns& asap = runs.get("pendulum_asap.ini");
  Clock::time_point start = Clock::now();
  const RunRecord& r = asap.records.at(0);
  if (!r.ok) return {false, "ASAP seed " + std::to_string(r.seed) + " failed"};
  Checkpoint trained = load_checkpoint(r.checkpoint);
  PpoConfig seeded = asap.config.ppo;
  seeded.seed = r.seed;
  std::unique_ptr<Environment> env = asap.config.make_env();
  ActorNetwork untrained = make_actor(*env, seeded);
  std::vector<Anchor> anchors = make_anchors(*env, 100, 4242);
  RatioStats before = probe_composite_lipschitz(untrained.mean_policy(), *env,
                                                anchors, 10000, 99);
  RatioStats after = probe_composite_lipschitz(trained.actor.mean_policy(),
                                               *env, anchors, 10000, 99);
  double seconds = seconds_since(start);
  // Context only: the same probe on the PPO policy of the same seed.
  std::string reference;
  const MethodRuns& base = runs.get("pendulum_base.ini");
  if (!base.records.empty() && base.records.front().ok) {
    Checkpoint ppo = load_checkpoint(base.records.front().checkpoint);
    RatioStats plain = probe_composite_lipschitz(ppo.actor.mean_policy(), *env,
                                                 anchors, 10000, 99);
    reference = ", PPO-trained " + fmt(plain.median, 4);
  }
  bool finite = std::isfinite(after.max) && std::isfinite(before.max);
  Outcome out;
  out.pass = finite && after.median <= before.median && seconds < 120.0;
  out.detail = "median ratio untrained " + fmt(before.median, 4) +
               " vs ASAP-trained " + fmt(after.median, 4) + " (max " +
               fmt(before.max, 4) + " / " + fmt(after.max, 4) + ")" + reference + ", " +
               std::to_string(after.ratios.size()) + " pairs, " +
               fmt(seconds, 3) + " s";
  return out;
}

Outcome determinism(const Context& ctx, Runs& runs) {
  const MethodRuns& asap = runs.get("pendulum_asap.ini");
  const RunRecord& first = asap.records.at(0);
  ExperimentConfig again = asap.config;
  again.output = ctx.work / "rerun";
  fs::remove_all(again.output);
  Clock::time_point start = Clock::now();
  RunRecord second = run_seed(again, first.seed);
  double seconds = seconds_since(start);
  std::string a = read_file(first.metrics);
  std::string b = read_file(second.metrics);
  bool same_eval = second.return_mean == first.return_mean &&
                   second.sm_mean == first.sm_mean;
  Outcome out;
  out.pass = a == b && !a.empty() && same_eval;
  out.detail = "metrics.csv " + std::string(a == b ? "byte-identical" : "DIFFERS") +
               " (" + std::to_string(a.size()) + " bytes), evaluation " +
               (same_eval ? "identical" : "DIFFERS") + ", rerun " +
               fmt(seconds, 3) + " s";
  return out;
}

}  // namespace
}  // namespace smooth

int main(int argc, char** argv) {
  using namespace smooth;
  tune_allocator();
  Context ctx;
  std::vector<int> only;
  CLI::App app{"acceptance checks"};
  app.add_option("--smoothctl", ctx.smoothctl, "smoothctl binary")->required();
  app.add_option("--configs", ctx.configs, "acceptance config directory")
      ->required();
  app.add_option("--work", ctx.work, "scratch directory")->required();
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(ctx.work);

  Runs runs(ctx);
  struct Criterion {
    int id;
    std::string title;
    std::function<Outcome()> check;
  };
  std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "stop-gradient contracts", stop_gradients},
      {3, "zero weights reduce to plain PPO", zero_weight_reduction},
      {4, "similar-state bound suite", [&] { return similar_state_suite(ctx); }},
      {5, "FFT and smoothness oracle", metric_oracle},
      {6, "ASAP reduces Sm at kept return", [&] {
         return directional_reduction(runs);
       }},
      {7, "spatial+temporal beats temporal-only", [&] { return ablation(runs); }},
      {8, "composite Lipschitz probe", [&] { return composite_probe(runs); }},
      {9, "rerun determinism", [&] { return determinism(ctx, runs); }},
  };
  std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    Clock::time_point start = Clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title
              << ": " << o.detail << " (" << fmt(seconds_since(start), 3)
              << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
