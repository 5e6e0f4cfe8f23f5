#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinsync/bench.hpp"
#include "twinsync/channel.hpp"
#include "twinsync/io.hpp"
#include "twinsync/kctd3.hpp"
#include "twinsync/predictor.hpp"
#include "twinsync/signal.hpp"

namespace twinsync {

// Complete run description. Every module config appears here; the CLI owns
// no hidden defaults. A fingerprint of the effective config is embedded in
// every output file so mixed artifacts are detectable.
namespace detail {
inline ChannelConfig default_channel() {
  ChannelConfig c;
  c.p_loss = 0.01;
  return c;
}
}  // namespace detail

struct RunConfig {
  std::uint64_t seed = 1;

  std::string trace_csv;  // when set, load this file instead of synthesizing
  SynthSpec synth = default_synth_spec(0);

  ChannelConfig channel = detail::default_channel();

  int pred_l_in = 0;  // 0 = from the de-correlation time of the trace
  double decorr_threshold = 0.5;
  int pred_h_max = 200;
  PredictorTrainConfig pred_train;
  std::string predictor_checkpoint;

  int w_max = 100;
  int warmup_w = 50;
  int warmup_n = 50;

  AgentConfig agent;
  std::string agent_checkpoint;

  BenchGrid grid;
  int repeats = 10;
  int eval_episodes = 10;
  int e2e_delay = 50;
  std::vector<double> gamma_c_list;             // empty = {agent.gamma_c}
  std::vector<double> p_loss_list{0.0, 0.01, 0.1};
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const char* scope,
                                std::initializer_list<const char*> allowed,
                                std::vector<std::string>& violations) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) violations.push_back(std::string(scope) + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* scope, const char* key, T& out,
                std::vector<std::string>& violations) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const std::exception&) {
    violations.push_back(std::string(scope) + "." + key + ": wrong type");
  }
}

}  // namespace detail

// Parses and validates; returns every violation instead of stopping at the
// first one. An empty violations list means the config is usable.
inline RunConfig parse_run_config(const nlohmann::json& j, std::vector<std::string>& violations) {
  using detail::read_field;
  using detail::reject_unknown_keys;
  RunConfig cfg;
  if (!j.is_object()) {
    violations.push_back("config: root must be a JSON object");
    return cfg;
  }
  reject_unknown_keys(j, "config",
                      {"seed", "trace", "channel", "predictor", "env", "agent", "bench"},
                      violations);
  read_field(j, "config", "seed", cfg.seed, violations);

  if (j.contains("trace")) {
    const auto& t = j.at("trace");
    reject_unknown_keys(t, "trace", {"csv", "components", "noise_std", "duration_slots"},
                        violations);
    read_field(t, "trace", "csv", cfg.trace_csv, violations);
    read_field(t, "trace", "noise_std", cfg.synth.noise_std_deg, violations);
    read_field(t, "trace", "duration_slots", cfg.synth.duration_slots, violations);
    if (t.contains("components")) {
      cfg.synth.components.clear();
      if (!t.at("components").is_array()) {
        violations.push_back("trace.components: must be an array");
      } else {
        for (const auto& c : t.at("components")) {
          reject_unknown_keys(c, "trace.components[]", {"amplitude", "frequency_hz", "phase"},
                              violations);
          SineComponent sc;
          read_field(c, "trace.components[]", "amplitude", sc.amplitude_deg, violations);
          read_field(c, "trace.components[]", "frequency_hz", sc.frequency_hz, violations);
          read_field(c, "trace.components[]", "phase", sc.phase_rad, violations);
          cfg.synth.components.push_back(sc);
        }
      }
    }
  }

  if (j.contains("channel")) {
    const auto& c = j.at("channel");
    reject_unknown_keys(c, "channel",
                        {"d_max", "d_forward", "d_feedback", "p_loss", "outage_target"},
                        violations);
    read_field(c, "channel", "d_max", cfg.channel.d_max, violations);
    read_field(c, "channel", "d_forward", cfg.channel.d_forward, violations);
    read_field(c, "channel", "d_feedback", cfg.channel.d_feedback, violations);
    read_field(c, "channel", "p_loss", cfg.channel.p_loss, violations);
    read_field(c, "channel", "outage_target", cfg.channel.outage_target, violations);
  }

  if (j.contains("predictor")) {
    const auto& p = j.at("predictor");
    reject_unknown_keys(p, "predictor",
                        {"l_in", "decorr_threshold", "h_max", "epochs", "batch", "learning_rate",
                         "hidden", "checkpoint"},
                        violations);
    read_field(p, "predictor", "l_in", cfg.pred_l_in, violations);
    read_field(p, "predictor", "decorr_threshold", cfg.decorr_threshold, violations);
    read_field(p, "predictor", "h_max", cfg.pred_h_max, violations);
    read_field(p, "predictor", "epochs", cfg.pred_train.epochs, violations);
    read_field(p, "predictor", "batch", cfg.pred_train.batch, violations);
    read_field(p, "predictor", "learning_rate", cfg.pred_train.learning_rate, violations);
    read_field(p, "predictor", "hidden", cfg.pred_train.hidden, violations);
    read_field(p, "predictor", "checkpoint", cfg.predictor_checkpoint, violations);
  }

  if (j.contains("env")) {
    const auto& e = j.at("env");
    reject_unknown_keys(e, "env", {"w_max", "warmup_w", "warmup_n"}, violations);
    read_field(e, "env", "w_max", cfg.w_max, violations);
    read_field(e, "env", "warmup_w", cfg.warmup_w, violations);
    read_field(e, "env", "warmup_n", cfg.warmup_n, violations);
  }

  if (j.contains("agent")) {
    const auto& a = j.at("agent");
    reject_unknown_keys(a, "agent",
                        {"gamma", "sigma", "noise_clip", "rho", "beta", "beta_decay_updates", "d_a", "d_lambda",
                         "batch", "buffer_capacity", "gamma_c", "episodes", "updates_per_step",
                         "hidden", "actor_lr", "critic_lr", "state_scale", "ablations",
                         "checkpoint"},
                        violations);
    read_field(a, "agent", "gamma", cfg.agent.gamma, violations);
    read_field(a, "agent", "sigma", cfg.agent.sigma, violations);
    read_field(a, "agent", "noise_clip", cfg.agent.noise_clip, violations);
    read_field(a, "agent", "rho", cfg.agent.rho, violations);
    read_field(a, "agent", "beta", cfg.agent.beta, violations);
    read_field(a, "agent", "beta_decay_updates", cfg.agent.beta_decay_updates, violations);
    read_field(a, "agent", "d_a", cfg.agent.d_a, violations);
    read_field(a, "agent", "d_lambda", cfg.agent.d_lambda, violations);
    read_field(a, "agent", "batch", cfg.agent.batch, violations);
    read_field(a, "agent", "buffer_capacity", cfg.agent.buffer_capacity, violations);
    read_field(a, "agent", "gamma_c", cfg.agent.gamma_c, violations);
    read_field(a, "agent", "episodes", cfg.agent.episodes, violations);
    read_field(a, "agent", "updates_per_step", cfg.agent.updates_per_step, violations);
    read_field(a, "agent", "hidden", cfg.agent.hidden, violations);
    read_field(a, "agent", "actor_lr", cfg.agent.actor_lr, violations);
    read_field(a, "agent", "critic_lr", cfg.agent.critic_lr, violations);
    read_field(a, "agent", "state_scale", cfg.agent.state_scale, violations);
    read_field(a, "agent", "checkpoint", cfg.agent_checkpoint, violations);
    if (a.contains("ablations")) {
      const auto& ab = a.at("ablations");
      reject_unknown_keys(ab, "agent.ablations",
                          {"double_q", "state_reduction", "action_norm", "apdo"}, violations);
      read_field(ab, "agent.ablations", "double_q", cfg.agent.ablations.double_q, violations);
      read_field(ab, "agent.ablations", "state_reduction", cfg.agent.ablations.state_reduction,
                 violations);
      read_field(ab, "agent.ablations", "action_norm", cfg.agent.ablations.action_norm,
                 violations);
      read_field(ab, "agent.ablations", "apdo", cfg.agent.ablations.apdo, violations);
    }
  }

  if (j.contains("bench")) {
    const auto& b = j.at("bench");
    reject_unknown_keys(b, "bench",
                        {"grid_w", "grid_n_step", "repeats", "eval_episodes", "e2e_delay",
                         "gamma_c_list", "p_loss_list"},
                        violations);
    read_field(b, "bench", "grid_w", cfg.grid.w_values, violations);
    read_field(b, "bench", "grid_n_step", cfg.grid.n_step, violations);
    read_field(b, "bench", "repeats", cfg.repeats, violations);
    read_field(b, "bench", "eval_episodes", cfg.eval_episodes, violations);
    read_field(b, "bench", "e2e_delay", cfg.e2e_delay, violations);
    read_field(b, "bench", "gamma_c_list", cfg.gamma_c_list, violations);
    read_field(b, "bench", "p_loss_list", cfg.p_loss_list, violations);
  }

  // Range checks on top of structural checks; collect rather than throw.
  try {
    cfg.synth.validate();
  } catch (const std::exception& e) {
    violations.push_back(std::string("trace: ") + e.what());
  }
  try {
    cfg.channel.validate();
  } catch (const std::exception& e) {
    violations.push_back(std::string("channel: ") + e.what());
  }
  try {
    cfg.agent.validate();
  } catch (const std::exception& e) {
    violations.push_back(std::string("agent: ") + e.what());
  }
  if (cfg.pred_h_max < 2 * cfg.w_max)
    violations.push_back("predictor.h_max: must cover two segments (>= 2 * env.w_max)");
  if (cfg.pred_l_in < 0) violations.push_back("predictor.l_in: negative");
  if (!(cfg.decorr_threshold > 0 && cfg.decorr_threshold < 1))
    violations.push_back("predictor.decorr_threshold: outside (0, 1)");
  if (cfg.pred_train.epochs < 0) violations.push_back("predictor.epochs: negative");
  if (cfg.pred_train.batch < 1) violations.push_back("predictor.batch: < 1");
  if (cfg.w_max < cfg.channel.d_max) violations.push_back("env.w_max: below channel.d_max");
  if (cfg.warmup_w < 2 || cfg.warmup_n < 2 || cfg.warmup_n > cfg.warmup_w)
    violations.push_back("env.warmup: need 2 <= warmup_n <= warmup_w");
  if (cfg.repeats < 1) violations.push_back("bench.repeats: < 1");
  if (cfg.eval_episodes < 1) violations.push_back("bench.eval_episodes: < 1");
  if (cfg.e2e_delay < 0) violations.push_back("bench.e2e_delay: negative");
  if (cfg.grid.n_step < 1) violations.push_back("bench.grid_n_step: < 1");
  if (cfg.grid.w_values.empty()) violations.push_back("bench.grid_w: empty");
  for (double p : cfg.p_loss_list)
    if (!(p >= 0 && p < 1)) violations.push_back("bench.p_loss_list: entry outside [0, 1)");
  return cfg;
}

// Canonical dump of the effective config; nlohmann orders keys, so the dump
// (and hence the fingerprint) is stable.
inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& c : cfg.synth.components)
    components.push_back({{"amplitude", c.amplitude_deg},
                          {"frequency_hz", c.frequency_hz},
                          {"phase", c.phase_rad}});
  return {
      {"seed", cfg.seed},
      {"trace",
       {{"csv", cfg.trace_csv},
        {"components", components},
        {"noise_std", cfg.synth.noise_std_deg},
        {"duration_slots", cfg.synth.duration_slots}}},
      {"channel",
       {{"d_max", cfg.channel.d_max},
        {"d_forward", cfg.channel.d_forward},
        {"d_feedback", cfg.channel.d_feedback},
        {"p_loss", cfg.channel.p_loss},
        {"outage_target", cfg.channel.outage_target}}},
      {"predictor",
       {{"l_in", cfg.pred_l_in},
        {"decorr_threshold", cfg.decorr_threshold},
        {"h_max", cfg.pred_h_max},
        {"epochs", cfg.pred_train.epochs},
        {"batch", cfg.pred_train.batch},
        {"learning_rate", cfg.pred_train.learning_rate},
        {"hidden", cfg.pred_train.hidden},
        {"checkpoint", cfg.predictor_checkpoint}}},
      {"env", {{"w_max", cfg.w_max}, {"warmup_w", cfg.warmup_w}, {"warmup_n", cfg.warmup_n}}},
      {"agent",
       {{"gamma", cfg.agent.gamma},
        {"sigma", cfg.agent.sigma},
        {"noise_clip", cfg.agent.noise_clip},
        {"rho", cfg.agent.rho},
        {"beta", cfg.agent.beta},
        {"beta_decay_updates", cfg.agent.beta_decay_updates},
        {"d_a", cfg.agent.d_a},
        {"d_lambda", cfg.agent.d_lambda},
        {"batch", cfg.agent.batch},
        {"buffer_capacity", cfg.agent.buffer_capacity},
        {"gamma_c", cfg.agent.gamma_c},
        {"episodes", cfg.agent.episodes},
        {"updates_per_step", cfg.agent.updates_per_step},
        {"hidden", cfg.agent.hidden},
        {"actor_lr", cfg.agent.actor_lr},
        {"critic_lr", cfg.agent.critic_lr},
        {"state_scale", cfg.agent.state_scale},
        {"ablations",
         {{"double_q", cfg.agent.ablations.double_q},
          {"state_reduction", cfg.agent.ablations.state_reduction},
          {"action_norm", cfg.agent.ablations.action_norm},
          {"apdo", cfg.agent.ablations.apdo}}},
        {"checkpoint", cfg.agent_checkpoint}}},
      {"bench",
       {{"grid_w", cfg.grid.w_values},
        {"grid_n_step", cfg.grid.n_step},
        {"repeats", cfg.repeats},
        {"eval_episodes", cfg.eval_episodes},
        {"e2e_delay", cfg.e2e_delay},
        {"gamma_c_list", cfg.gamma_c_list},
        {"p_loss_list", cfg.p_loss_list}}}};
}

// Input/checkpoint paths are excluded: they select where bytes live, not
// what is computed, so the same logical run fingerprints identically from
// any directory and all stages of one pipeline share one fingerprint.
inline std::string config_fingerprint(const RunConfig& cfg) {
  nlohmann::json j = run_config_to_json(cfg);
  j["trace"]["csv"] = "";
  j["predictor"]["checkpoint"] = "";
  j["agent"]["checkpoint"] = "";
  return fingerprint_hex(fnv1a64(j.dump()));
}

}  // namespace twinsync
