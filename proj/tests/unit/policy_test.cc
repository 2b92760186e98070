#include <bit>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include <gtest/gtest.h>

#include "gradcheck.h"
#include "smooth/core/errors.h"
#include "smooth/policy/checkpoint.h"
#include "smooth/policy/networks.h"

namespace smooth {
namespace {

ActorConfig small_actor_config() {
  ActorConfig c;
  c.obs_dim = 3;
  c.action_dim = 2;
  c.hidden = {8, 8};
  c.action_low = {-1.0, 0.0};
  c.action_high = {1.0, 4.0};
  c.head_init_scale = 1.0;
  return c;
}

void zero(Linear& layer) {
  for (double& w : layer.weight.data()) w = 0.0;
  for (double& b : layer.bias.data()) b = 0.0;
}

TEST(ActorTest, ZeroHeadsGiveCenterOfBounds) {
  Rng rng(1);
  ActorNetwork actor(small_actor_config(), rng);
  zero(actor.action_head);
  zero(actor.prediction_head);
  Vec state{0.3, -0.2, 1.5};
  EXPECT_EQ(actor.act_mean(state), (Vec{0.0, 2.0}));
  EXPECT_EQ(actor.predict_next_mean(state), (Vec{0.0, 2.0}));
}

TEST(ActorTest, DeterministicAndWithinBounds) {
  Rng rng(2);
  ActorConfig cfg = small_actor_config();
  cfg.head_init_scale = 5.0;
  ActorNetwork actor(cfg, rng);
  Rng states(9);
  for (int i = 0; i < 200; ++i) {
    Vec s{3 * states.normal(), 3 * states.normal(), 3 * states.normal()};
    Vec a = actor.act_mean(s);
    EXPECT_EQ(a, actor.act_mean(s));
    for (std::size_t d = 0; d < 2; ++d) {
      EXPECT_GE(a[d], cfg.action_low[d]);
      EXPECT_LE(a[d], cfg.action_high[d]);
    }
    Vec p = actor.predict_next_mean(s);
    for (std::size_t d = 0; d < 2; ++d) {
      EXPECT_GE(p[d], cfg.action_low[d]);
      EXPECT_LE(p[d], cfg.action_high[d]);
    }
  }
}

TEST(ActorTest, RejectsBadStates) {
  Rng rng(2);
  ActorNetwork actor(small_actor_config(), rng);
  EXPECT_THROW(actor.act_mean(Vec{1.0, 2.0}), ShapeError);
  EXPECT_THROW(actor.act_mean(Vec{1.0, NAN, 0.0}), NumericError);
}

TEST(ActorTest, ParameterGroupsPartition) {
  Rng rng(3);
  ActorNetwork actor(small_actor_config(), rng);
  std::set<const Tensor*> seen;
  std::set<std::string> names;
  std::map<ParamGroup, int> per_group;
  std::size_t total = 0;
  for (const ParamRef& p : actor.parameters()) {
    EXPECT_TRUE(seen.insert(p.tensor).second) << p.name;
    EXPECT_TRUE(names.insert(p.name).second) << p.name;
    per_group[p.group] += 1;
    total += p.tensor->size();
  }
  EXPECT_EQ(per_group[ParamGroup::kTrunk], 4);
  EXPECT_EQ(per_group[ParamGroup::kActionHead], 2);
  EXPECT_EQ(per_group[ParamGroup::kLogStd], 1);
  EXPECT_EQ(per_group[ParamGroup::kPredictionHead], 2);
  EXPECT_EQ(total, actor.parameter_count());
  EXPECT_EQ(total, 3u * 8 + 8 + 8 * 8 + 8 + 8 * 2 + 2 + 2 + 8 * 2 + 2);
}

TEST(ActorTest, PredictionLossTouchesOnlyPredictionHeadAndTrunk) {
  Rng rng(4);
  ActorNetwork actor(small_actor_config(), rng);
  Tensor states = testing::random_tensor({5, 3}, rng);
  Graph g(true);
  BoundActor bound(g, actor);
  g.backward(g.mean(g.square(bound.predict(g.constant(states)))));
  auto params = actor.parameters();
  auto grads = bound.grads();
  for (std::size_t i = 0; i < params.size(); ++i) {
    double norm = 0.0;
    for (double x : grads[i].data()) norm += std::abs(x);
    if (params[i].group == ParamGroup::kActionHead ||
        params[i].group == ParamGroup::kLogStd) {
      EXPECT_EQ(norm, 0.0) << params[i].name;
    } else {
      EXPECT_GT(norm, 0.0) << params[i].name;
    }
  }
}

TEST(ActorTest, PredictionGradientMatchesFiniteDifferences) {
  Rng rng(5);
  ActorNetwork actor(small_actor_config(), rng);
  Tensor states = testing::random_tensor({4, 3}, rng);
  auto params = actor.parameters();
  std::vector<Tensor> inputs;
  for (const ParamRef& p : params) inputs.push_back(*p.tensor);
  auto fn = [&](Graph& g, const std::vector<Var>& leaves) {
    ActorNetwork copy = actor;
    auto cp = copy.parameters();
    for (std::size_t i = 0; i < cp.size(); ++i) *cp[i].tensor = leaves[i].value();
    // Rebuild through the bound network so that gradients reach the leaves.
    Var h = g.constant(states);
    for (std::size_t l = 0; l < copy.trunk.size(); ++l) {
      h = g.tanh(g.matmul(h, leaves[2 * l]) + leaves[2 * l + 1]);
    }
    std::size_t p = 2 * copy.trunk.size() + 3;
    Var pred = g.tanh(g.matmul(h, leaves[p]) + leaves[p + 1]) *
                   g.constant(Tensor::vector(copy.half_range())) +
               g.constant(Tensor::vector(copy.center()));
    return g.mean(g.square(pred));
  };
  auto result = testing::check_gradients(fn, inputs);
  EXPECT_LE(result.max_rel_error, 1e-4) << result.worst;

  // The bound network produces the same gradient as the hand-built graph.
  Graph g(true);
  BoundActor bound(g, actor);
  g.backward(g.mean(g.square(bound.predict(g.constant(states)))));
  auto reference = testing::analytic_grads(fn, inputs);
  auto grads = bound.grads();
  for (std::size_t i = 0; i < grads.size(); ++i) {
    for (std::size_t k = 0; k < grads[i].size(); ++k) {
      EXPECT_NEAR(grads[i][k], reference[i][k], 1e-12) << params[i].name;
    }
  }
}

TEST(ActorTest, SampleCollapsesToMeanAsStdVanishes) {
  Rng rng(6);
  ActorNetwork actor(small_actor_config(), rng);
  for (double& x : actor.log_std.data()) x = -30.0;
  Vec s{0.1, 0.2, -0.3};
  Rng sampler(1);
  SampledAction sample = actor.sample_action(s, sampler);
  Vec mean = actor.act_mean(s);
  for (std::size_t d = 0; d < 2; ++d) {
    EXPECT_NEAR(sample.action[d], mean[d], 1e-10);
  }
}

TEST(ActorTest, LogProbMatchesDensityRecomputation) {
  Rng rng(7);
  ActorNetwork actor(small_actor_config(), rng);
  Rng sampler(11);
  Rng states(12);
  for (int trial = 0; trial < 50; ++trial) {
    Vec s{states.normal(), states.normal(), states.normal()};
    SampledAction sample = actor.sample_action(s, sampler);
    // Oracle: invert the squash and apply the change of variables.
    Graph g(false);
    BoundActor bound(g, actor);
    Tensor mu = bound.pre_mean(bound.features(
                                   g.constant(Tensor::matrix(1, 3, s))))
                    .value();
    double log_density = 0.0;
    for (std::size_t d = 0; d < 2; ++d) {
      double c = actor.center()[d], h = actor.half_range()[d];
      double y = (sample.action[d] - c) / h;
      double u = std::atanh(y);
      double sd = std::exp(actor.log_std[d]);
      double gauss = std::exp(-0.5 * std::pow((u - mu[d]) / sd, 2)) /
                     (sd * std::sqrt(2 * M_PI));
      double jacobian = h * (1.0 - y * y);
      log_density += std::log(gauss / jacobian);
    }
    EXPECT_NEAR(sample.log_prob, log_density, 1e-9);
  }
}

TEST(ActorTest, GraphLogProbAgreesWithSampler) {
  Rng rng(8);
  ActorNetwork actor(small_actor_config(), rng);
  Rng sampler(3);
  Vec s{0.5, -0.5, 0.25};
  SampledAction sample = actor.sample_action(s, sampler);
  Graph g(true);
  BoundActor bound(g, actor);
  Var pre = bound.pre_mean(bound.features(g.constant(Tensor::matrix(1, 3, s))));
  Var lp = bound.log_prob(pre, Tensor::matrix(1, 2, sample.pre_squash));
  EXPECT_NEAR(lp.value()[0], sample.log_prob, 1e-12);
}

TEST(ActorTest, SamplingIsSeedDeterministic) {
  Rng rng(9);
  ActorNetwork actor(small_actor_config(), rng);
  Vec s{0.5, -0.5, 0.25};
  Rng a(77), b(77);
  SampledAction x = actor.sample_action(s, a);
  SampledAction y = actor.sample_action(s, b);
  EXPECT_EQ(x.action, y.action);
  EXPECT_EQ(x.log_prob, y.log_prob);
}

TEST(ActorTest, MeanIsContinuous) {
  Rng rng(10);
  ActorNetwork actor(small_actor_config(), rng);
  Rng states(1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec s{states.normal(), states.normal(), states.normal()};
    Vec t = s;
    t[i % 3] += 1e-6;
    worst = std::max(worst, l2_distance(actor.act_mean(s), actor.act_mean(t)) / 1e-6);
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LT(worst, 1e3);
}

TEST(CriticTest, ScalarPerState) {
  Rng rng(11);
  CriticNetwork critic(CriticConfig{.obs_dim = 3, .hidden = {8, 8}}, rng);
  Tensor states = testing::random_tensor({6, 3}, rng);
  Tensor v = critic.value(states);
  EXPECT_EQ(v.shape(), (Shape{6, 1}));
  EXPECT_DOUBLE_EQ(v[2], critic.value(states.row(2)));
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    ActorNetwork actor(small_actor_config(), rng);
    CriticNetwork critic(CriticConfig{.obs_dim = 3, .hidden = {8, 8}}, rng);
    // Values with long mantissas and extreme exponents.
    actor.log_std[0] = 0.1 + 0.2;
    actor.trunk[0].bias[0] = 1e-300;
    actor.trunk[0].bias[1] = -std::nextafter(1.0, 2.0);
    std::string text = serialize_checkpoint(actor, critic, "abc123");
    Checkpoint ckpt = parse_checkpoint(text);
    EXPECT_EQ(ckpt.config_hash, "abc123");
    EXPECT_EQ(parameter_hash(ckpt.actor.parameter_tensors()),
              parameter_hash(actor.parameter_tensors()));
    EXPECT_EQ(parameter_hash(ckpt.critic.parameter_tensors()),
              parameter_hash(critic.parameter_tensors()));
    EXPECT_EQ(serialize_checkpoint(ckpt.actor, ckpt.critic, "abc123"), text);
  }
}

TEST(CheckpointTest, RejectsBadDocuments) {
  Rng rng(1);
  ActorNetwork actor(small_actor_config(), rng);
  CriticNetwork critic(CriticConfig{.obs_dim = 3, .hidden = {8, 8}}, rng);
  std::string text = serialize_checkpoint(actor, critic, "h");
  EXPECT_THROW(parse_checkpoint("{not json"), Error);
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find("\"version\": 1"), 12,
                        "\"version\": 9");
  EXPECT_THROW(parse_checkpoint(wrong_version), Error);
  auto doc = nlohmann::json::parse(text);
  doc["actor"]["params"][0]["shape"] = {2, 2};
  EXPECT_THROW(parse_checkpoint(doc.dump()), Error);
}

TEST(ParameterHashTest, SensitiveToSingleBit) {
  Tensor a = Tensor::vector({1.0, 2.0});
  Tensor b = a;
  b[1] = std::nextafter(2.0, 3.0);
  EXPECT_NE(parameter_hash({&a}), parameter_hash({&b}));
  EXPECT_EQ(parameter_hash({&a}), parameter_hash({&a}));
}

}  // namespace
}  // namespace smooth
