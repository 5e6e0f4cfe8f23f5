#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "twinsync/env.hpp"
#include "twinsync/kctd3.hpp"
#include "twinsync/signal.hpp"

using namespace twinsync;

namespace {

PredictorModel hold_last_predictor(int l_in, int h_max) {
  PredictorModel m;
  m.l_in = l_in;
  m.h_max = h_max;
  Layer l;
  l.in = l_in;
  l.out = h_max;
  l.w.assign(static_cast<std::size_t>(l_in) * h_max, 0.0);
  for (int o = 0; o < h_max; ++o) l.w[static_cast<std::size_t>(o) * l_in + (l_in - 1)] = 1.0;
  l.b.assign(static_cast<std::size_t>(h_max), 0.0);
  l.act = {Act::Identity};
  m.net.layers.push_back(l);
  return m;
}

// Critic that always outputs `value` (zero weights, constant bias).
DenseNet constant_critic(int in_dim, double value) {
  DenseNet net;
  Layer l;
  l.in = in_dim;
  l.out = 1;
  l.w.assign(static_cast<std::size_t>(in_dim), 0.0);
  l.b = {value};
  l.act = {Act::Identity};
  net.layers.push_back(l);
  return net;
}

// Critic that returns a fixed linear form over [s, a1, a2].
DenseNet linear_critic(int in_dim, const std::vector<double>& coeffs) {
  DenseNet net;
  Layer l;
  l.in = in_dim;
  l.out = 1;
  l.w = coeffs;
  l.b = {0.0};
  l.act = {Act::Identity};
  net.layers.push_back(l);
  return net;
}

BatchData single_transition_batch(double s, std::array<double, 2> a, double r, double c,
                                  double s_next) {
  BatchData b;
  b.size = 1;
  b.state_dim = 1;
  b.s = {s};
  b.s_next = {s_next};
  b.a = {a};
  b.r = {r};
  b.c = {c};
  return b;
}

AgentConfig small_agent_config() {
  AgentConfig cfg;
  cfg.hidden = {8, 8};
  cfg.batch = 4;
  cfg.buffer_capacity = 512;
  cfg.gamma_c = 0.01;
  cfg.seed = 42;
  return cfg;
}

EnvConfig tiny_env_config(std::uint64_t trace_seed = 1) {
  SynthSpec spec = default_synth_spec(trace_seed);
  spec.duration_slots = 1200;
  EnvConfig cfg;
  cfg.trajectory = synthesize_trace(spec);
  cfg.channel.d_max = 10;
  cfg.channel.p_loss = 0.01;
  cfg.predictor = hold_last_predictor(15, 80);
  cfg.w_max = 40;
  cfg.warmup_w = 20;
  cfg.warmup_n = 20;
  return cfg;
}

}  // namespace

TEST_CASE("Bellman and dual scalar fixtures") {
  REQUIRE(reward_target_value(-0.5, 0.9, 1.0, 0.8) == Catch::Approx(0.22));
  REQUIRE(reward_target_value(1.0, 0.0, 5.0, 7.0) == 1.0);  // myopic
  REQUIRE(reward_target_value(0.3, 0.5, 2.0, 2.0) == Catch::Approx(1.3));  // tie
  REQUIRE(cost_target_value(0.01, 0.9, 0.1, 0.2) == Catch::Approx(0.19));
  REQUIRE(cost_target_value(0.7, 0.0, 1.0, 2.0) == 0.7);
  REQUIRE(cost_target_value(0.0, 0.5, 0.4, 0.4) == Catch::Approx(0.2));  // tie
  REQUIRE(dual_update_value(0.5, 2.0, 0.1, 0.1, 0.9) == Catch::Approx(0.6));
  REQUIRE(dual_update_value(0.01, -5.0, 0.1, 0.1, 0.9) == 0.0);  // projection
  REQUIRE(dual_update_value(0.37, 100.0, 0.0, 0.1, 0.9) == 0.37);  // beta = 0
}

TEST_CASE("select_action clips noise and bounds") {
  Rng init(1);
  SECTION("sigma 0 is deterministic and consumes no randomness") {
    const DenseNet actor = make_mlp(1, {4}, 2, Act::Relu,
                                    std::vector<Act>{Act::Tanh, Act::Sigmoid}, init);
    Rng r1(5), r2(99);
    const std::vector<double> s{0.2};
    const auto a1 = select_action(actor, s, 0.0, 0.2, r1);
    const auto a2 = select_action(actor, s, 0.0, 0.2, r2);
    REQUIRE(a1 == a2);
    REQUIRE(a1[0] >= -1.0);
    REQUIRE(a1[0] <= 1.0);
    REQUIRE(a1[1] >= 0.0);
    REQUIRE(a1[1] <= 1.0);
  }
  SECTION("an unbounded head is clipped to the action box") {
    DenseNet wild;
    Layer l;
    l.in = 1;
    l.out = 2;
    l.w = {0.0, 0.0};
    l.b = {5.0, -3.0};
    l.act = {Act::Identity};
    wild.layers.push_back(l);
    Rng rng(3);
    const auto a = select_action(wild, std::vector<double>{0.0}, 0.0, 0.2, rng);
    REQUIRE(a[0] == 1.0);
    REQUIRE(a[1] == 0.0);
  }
  SECTION("noise magnitude never exceeds the clip") {
    const DenseNet actor = make_mlp(1, {4}, 2, Act::Relu,
                                    std::vector<Act>{Act::Tanh, Act::Sigmoid}, init);
    Rng quiet(0);
    const std::vector<double> s{0.1};
    const auto base = select_action(actor, s, 0.0, 0.05, quiet);
    Rng noisy(7);
    for (int i = 0; i < 500; ++i) {
      const auto a = select_action(actor, s, 0.1, 0.05, noisy);
      REQUIRE(std::abs(a[0] - base[0]) <= 0.05 + 1e-15);
      REQUIRE(std::abs(a[1] - base[1]) <= 0.05 + 1e-15);
    }
  }
}

TEST_CASE("replay buffer") {
  SECTION("batch indices are distinct and uniform-ish") {
    ReplayBuffer buf(100);
    for (int i = 0; i < 100; ++i)
      buf.push(Transition{{static_cast<double>(i)}, {0, 0}, 0, 0, {0.0}});
    Rng rng(123);
    std::vector<int> counts(100, 0);
    const int batches = 10000, batch = 10;
    for (int b = 0; b < batches; ++b) {
      const auto idx = buf.sample_indices(batch, rng);
      std::vector<bool> seen(100, false);
      for (auto i : idx) {
        REQUIRE_FALSE(seen[i]);  // without replacement within the batch
        seen[i] = true;
        ++counts[i];
      }
    }
    // 1e5 draws over 100 items: mean 1000, sigma ~30; all within 3.5 sigma
    // for this fixed seed.
    const double mean = 1000.0, sigma = std::sqrt(batches * 0.1 * 0.9);
    for (int c : counts) REQUIRE(std::abs(c - mean) <= 3.5 * sigma);
  }
  SECTION("overwrites the oldest when full") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i)
      buf.push(Transition{{static_cast<double>(i)}, {0, 0}, 0, 0, {0.0}});
    REQUIRE(buf.size() == 3);
    REQUIRE(buf.latest().s[0] == 4.0);
    std::vector<double> kept;
    for (std::size_t i = 0; i < buf.size(); ++i) kept.push_back(buf[i].s[0]);
    std::sort(kept.begin(), kept.end());
    REQUIRE(kept == std::vector<double>{2.0, 3.0, 4.0});
  }
}

TEST_CASE("critic updates against hand-checkable fixtures") {
  AgentConfig cfg = small_agent_config();
  cfg.gamma = 0.9;
  Rng init(3);
  Agent agent(cfg, 1, init);

  SECTION("networks already equal to their targets stay put") {
    for (DenseNet* n : {&agent.reward_critic_1, &agent.reward_critic_2, &agent.cost_critic_1,
                        &agent.cost_critic_2, &agent.reward_critic_1_target,
                        &agent.reward_critic_2_target, &agent.cost_critic_1_target,
                        &agent.cost_critic_2_target}) {
      for (auto& l : n->layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
      }
    }
    BatchData b = single_transition_batch(0.1, {0.0, 0.5}, 0.0, 0.0, 0.2);
    const auto [loss_r, loss_c] = agent.update_critics(b);
    REQUIRE(loss_r == 0.0);
    REQUIRE(loss_c == 0.0);
    for (double w : agent.reward_critic_1.layers[0].w) REQUIRE(w == 0.0);
  }

  SECTION("single-transition MSBE matches hand arithmetic") {
    agent.reward_critic_1 = constant_critic(3, 0.4);
    agent.reward_critic_2 = constant_critic(3, 0.9);
    agent.cost_critic_1 = constant_critic(3, 0.6);
    agent.cost_critic_2 = constant_critic(3, 0.2);
    agent.reward_critic_1_target = constant_critic(3, 1.0);
    agent.reward_critic_2_target = constant_critic(3, 0.8);
    agent.cost_critic_1_target = constant_critic(3, 0.1);
    agent.cost_critic_2_target = constant_critic(3, 0.2);
    agent.rc1_opt = make_opt_state(agent.reward_critic_1, cfg.critic_lr);
    agent.rc2_opt = make_opt_state(agent.reward_critic_2, cfg.critic_lr);
    agent.cc1_opt = make_opt_state(agent.cost_critic_1, cfg.critic_lr);
    agent.cc2_opt = make_opt_state(agent.cost_critic_2, cfg.critic_lr);
    BatchData b = single_transition_batch(0.1, {0.0, 0.5}, -0.5, 0.01, 0.2);
    // y_r = -0.5 + 0.9*min(1.0, 0.8) = 0.22; y_c = 0.01 + 0.9*max(0.1, 0.2) = 0.19
    const auto targets_r = agent.reward_targets(b);
    const auto targets_c = agent.cost_targets(b);
    REQUIRE(targets_r[0] == Catch::Approx(0.22));
    REQUIRE(targets_c[0] == Catch::Approx(0.19));
    const auto [loss_r, loss_c] = agent.update_critics(b);
    const double expect_r = 0.5 * (std::pow(0.4 - 0.22, 2) + std::pow(0.9 - 0.22, 2));
    const double expect_c = 0.5 * (std::pow(0.6 - 0.19, 2) + std::pow(0.2 - 0.19, 2));
    REQUIRE(loss_r == Catch::Approx(expect_r));
    REQUIRE(loss_c == Catch::Approx(expect_c));
  }

  SECTION("repeated updates on a frozen batch reduce the loss") {
    Rng rng(9);
    BatchData b;
    b.size = 4;
    b.state_dim = 1;
    for (int i = 0; i < 4; ++i) {
      b.s.push_back(rng.uniform(0, 0.1));
      b.s_next.push_back(rng.uniform(0, 0.1));
      b.a.push_back({rng.uniform(-1, 1), rng.uniform(0, 1)});
      b.r.push_back(rng.uniform(-1, 0));
      b.c.push_back(rng.uniform(0, 0.1));
    }
    double first_r = 0, first_c = 0, last_r = 0, last_c = 0;
    for (int step = 0; step < 100; ++step) {
      const auto [lr, lc] = agent.update_critics(b);  // targets stay frozen: no polyak
      if (step == 0) {
        first_r = lr;
        first_c = lc;
      }
      last_r = lr;
      last_c = lc;
    }
    REQUIRE(last_r < first_r);
    REQUIRE(last_c < first_c);
  }
}

TEST_CASE("twin targets bound each single-critic estimate") {
  AgentConfig cfg = small_agent_config();
  Rng init(8);
  Agent agent(cfg, 1, init);
  Rng rng(12);
  BatchData b;
  b.size = 16;
  b.state_dim = 1;
  for (int i = 0; i < 16; ++i) {
    b.s.push_back(rng.uniform(0, 0.2));
    b.s_next.push_back(rng.uniform(0, 0.2));
    b.a.push_back({rng.uniform(-1, 1), rng.uniform(0, 1)});
    b.r.push_back(rng.uniform(-1, 0));
    b.c.push_back(rng.uniform(0, 0.2));
  }
  const auto y_r = agent.reward_targets(b);
  const auto y_c = agent.cost_targets(b);
  ForwardTrace atr;
  for (int i = 0; i < b.size; ++i) {
    forward_trace(agent.actor_target, b.next_state(i), atr);
    std::vector<double> xq{b.s_next[static_cast<std::size_t>(i)], atr.output()[0],
                           atr.output()[1]};
    for (const DenseNet* critic : {&agent.reward_critic_1_target, &agent.reward_critic_2_target})
      REQUIRE(y_r[static_cast<std::size_t>(i)] <=
              b.r[static_cast<std::size_t>(i)] + cfg.gamma * forward(*critic, xq)[0] + 1e-12);
    for (const DenseNet* critic : {&agent.cost_critic_1_target, &agent.cost_critic_2_target})
      REQUIRE(y_c[static_cast<std::size_t>(i)] >=
              b.c[static_cast<std::size_t>(i)] + cfg.gamma * forward(*critic, xq)[0] - 1e-12);
  }
}

TEST_CASE("disabling double_q switches targets to the first critic only") {
  AgentConfig cfg = small_agent_config();
  cfg.gamma = 0.5;
  Rng init(4);
  Agent agent(cfg, 1, init);
  agent.reward_critic_1_target = constant_critic(3, 2.0);
  agent.reward_critic_2_target = constant_critic(3, 1.0);  // the smaller twin
  agent.cost_critic_1_target = constant_critic(3, 0.1);
  agent.cost_critic_2_target = constant_critic(3, 0.3);  // the larger twin
  BatchData b = single_transition_batch(0.0, {0.0, 0.5}, 1.0, 0.2, 0.0);

  REQUIRE(agent.reward_targets(b)[0] == Catch::Approx(1.0 + 0.5 * 1.0));
  REQUIRE(agent.cost_targets(b)[0] == Catch::Approx(0.2 + 0.5 * 0.3));

  AgentConfig ablated = cfg;
  ablated.ablations.double_q = false;
  Rng init2(4);
  Agent single(ablated, 1, init2);  // same seed: identical nets
  single.reward_critic_1_target = constant_critic(3, 2.0);
  single.reward_critic_2_target = constant_critic(3, 1.0);
  single.cost_critic_1_target = constant_critic(3, 0.1);
  single.cost_critic_2_target = constant_critic(3, 0.3);
  REQUIRE(single.reward_targets(b)[0] == Catch::Approx(1.0 + 0.5 * 2.0));  // Q1, not min
  REQUIRE(single.cost_targets(b)[0] == Catch::Approx(0.2 + 0.5 * 0.1));    // Q1, not max

  // Only the target arithmetic changes: both agents started identical.
  for (std::size_t i = 0; i < agent.actor.layers.size(); ++i)
    REQUIRE(agent.actor.layers[i].w == single.actor.layers[i].w);
}

TEST_CASE("actor ascends the Lagrangian through the critics") {
  AgentConfig cfg = small_agent_config();
  cfg.actor_lr = 1e-2;
  Rng init(15);
  BatchData b;
  b.size = 8;
  b.state_dim = 1;
  Rng rng(2);
  for (int i = 0; i < 8; ++i) {
    b.s.push_back(rng.uniform(0, 0.2));
    b.s_next.push_back(0.0);
    b.a.push_back({0, 0});
    b.r.push_back(0);
    b.c.push_back(0);
  }
  auto mean_a2 = [&](Agent& agent) {
    double acc = 0;
    for (int i = 0; i < b.size; ++i) acc += forward(agent.actor, b.state(i))[1];
    return acc / b.size;
  };

  SECTION("lambda 0 with a reward critic that pays for larger a2") {
    Agent agent(cfg, 1, init);
    agent.reward_critic_1 = linear_critic(3, {0.0, 0.0, 1.0});  // Q = a2
    agent.cost_critic_1 = constant_critic(3, 0.0);
    agent.set_lambda(0.0);
    double prev = mean_a2(agent);
    for (int step = 0; step < 20; ++step) {
      agent.update_actor(b);
      const double cur = mean_a2(agent);
      REQUIRE(cur > prev);
      prev = cur;
    }
  }
  SECTION("huge lambda with a cost critic that charges for larger a2") {
    Agent agent(cfg, 1, init);
    agent.reward_critic_1 = constant_critic(3, 0.0);
    agent.cost_critic_1 = linear_critic(3, {0.0, 0.0, 1.0});  // cost = a2
    agent.set_lambda(1e6);
    double prev = mean_a2(agent);
    for (int step = 0; step < 20; ++step) {
      agent.update_actor(b);
      const double cur = mean_a2(agent);
      REQUIRE(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("dual update paths") {
  AgentConfig cfg = small_agent_config();
  cfg.beta = 0.1;
  cfg.gamma = 0.9;
  cfg.gamma_c = 0.1;  // threshold Gamma_c/(1-gamma) = 1.0
  Rng init(5);
  Agent agent(cfg, 1, init);
  agent.cost_critic_1 = constant_critic(3, 2.0);  // mean Q^C = 2 everywhere
  BatchData b = single_transition_batch(0.3, {0.1, 0.4}, -0.2, 0.05, 0.1);
  agent.set_lambda(0.5);
  agent.update_dual(b);
  REQUIRE(agent.lambda() == Catch::Approx(0.6));
  SECTION("projection clamps at zero") {
    agent.cost_critic_1 = constant_critic(3, -50.0);
    agent.update_dual(b);
    REQUIRE(agent.lambda() == 0.0);
  }
}

TEST_CASE("apdo ablation uses only the latest transition") {
  AgentConfig cfg = small_agent_config();
  cfg.beta = 1.0;
  cfg.gamma = 0.5;
  cfg.gamma_c = 1.0;  // threshold = 2.0
  Rng init(6);
  Agent agent(cfg, 1, init);
  // Cost value equals the state, so replay mean and latest state differ.
  agent.cost_critic_1 = linear_critic(3, {1.0, 0.0, 0.0});
  ReplayBuffer buf(16);
  for (double s : {1.0, 2.0, 3.0, 10.0})
    buf.push(Transition{{s}, {0, 0}, 0, 0, {s}});
  const std::vector<std::size_t> all{0, 1, 2, 3};
  const BatchData whole = assemble_batch(buf, all, 1);

  agent.set_lambda(0.0);
  agent.update_dual(whole);  // mean Q^C = 4.0 -> lambda = 2.0
  REQUIRE(agent.lambda() == Catch::Approx(2.0));

  BatchData latest;
  latest.size = 1;
  latest.state_dim = 1;
  latest.s = buf.latest().s;
  latest.s_next = buf.latest().s_next;
  latest.a = {buf.latest().a};
  latest.r = {buf.latest().r};
  latest.c = {buf.latest().c};
  agent.set_lambda(0.0);
  agent.update_dual(latest);  // Q^C(10) = 10 -> lambda = 8.0
  REQUIRE(agent.lambda() == Catch::Approx(8.0));
}

TEST_CASE("training for zero episodes returns the initialization") {
  EnvConfig env_cfg = tiny_env_config();
  Environment env(env_cfg);
  AgentConfig cfg = small_agent_config();
  cfg.episodes = 0;
  const TrainResult res = train(env, cfg);
  REQUIRE(res.log.episodes.empty());
  Rng init = make_stream(cfg.seed, "agent-init");
  const Agent fresh(cfg, 1, init);
  for (std::size_t i = 0; i < fresh.actor.layers.size(); ++i)
    REQUIRE(res.agent.actor.layers[i].w == fresh.actor.layers[i].w);
  REQUIRE(res.agent.lambda() == 0.0);
}

TEST_CASE("training is bit-deterministic per seed") {
  AgentConfig cfg = small_agent_config();
  cfg.episodes = 2;
  EnvConfig env_cfg = tiny_env_config();
  Environment env1(env_cfg), env2(env_cfg);
  const TrainResult a = train(env1, cfg);
  const TrainResult b = train(env2, cfg);
  REQUIRE(a.log.episodes.size() == b.log.episodes.size());
  for (std::size_t i = 0; i < a.log.episodes.size(); ++i) {
    REQUIRE(a.log.episodes[i].mean_load == b.log.episodes[i].mean_load);
    REQUIRE(a.log.episodes[i].mean_cost == b.log.episodes[i].mean_cost);
    REQUIRE(a.log.episodes[i].lambda == b.log.episodes[i].lambda);
  }
  for (std::size_t i = 0; i < a.agent.actor.layers.size(); ++i)
    REQUIRE(a.agent.actor.layers[i].w == b.agent.actor.layers[i].w);
}

TEST_CASE("training under the raw-state ablation uses l_in-dimensional states") {
  EnvConfig env_cfg = tiny_env_config();
  env_cfg.emit_raw_state = true;
  Environment env(env_cfg);
  AgentConfig cfg = small_agent_config();
  cfg.episodes = 1;
  cfg.ablations.state_reduction = false;
  const TrainResult res = train(env, cfg);
  REQUIRE(res.agent.state_dim() == env.l_in());
  REQUIRE(res.agent.actor.in_dim() == env.l_in());
  // The reduced-state ablation demands the env emit raw windows.
  EnvConfig plain = tiny_env_config();
  Environment env2(plain);
  REQUIRE_THROWS_AS(train(env2, cfg), std::invalid_argument);
}

TEST_CASE("lambda stays non-negative through training") {
  AgentConfig cfg = small_agent_config();
  cfg.episodes = 3;
  cfg.d_lambda = 3;
  cfg.beta = 0.5;  // aggressive dual steps to stress the projection
  EnvConfig env_cfg = tiny_env_config();
  Environment env(env_cfg);
  const TrainResult res = train(env, cfg);
  for (const auto& ep : res.log.episodes) REQUIRE(ep.lambda >= 0.0);
}

TEST_CASE("agent checkpoint round trip preserves behaviour") {
  AgentConfig cfg = small_agent_config();
  cfg.episodes = 1;
  EnvConfig env_cfg = tiny_env_config();
  Environment env(env_cfg);
  const TrainResult res = train(env, cfg);
  const nlohmann::json j = nlohmann::json::parse(agent_to_json(res.agent, "fp0123").dump());
  const Agent back = agent_from_json(j, cfg);
  REQUIRE(back.lambda() == res.agent.lambda());
  Rng quiet(0);
  const std::vector<double> s{0.123};
  REQUIRE(back.act(s, 0.0, quiet) == res.agent.act(s, 0.0, quiet));
}
