#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "twinsync/channel.hpp"
#include "twinsync/env.hpp"
#include "twinsync/kctd3.hpp"
#include "twinsync/predictor.hpp"
#include "twinsync/signal.hpp"

namespace twinsync {

struct EvalReport {
  double normalized_load = 0.0;
  double avg_error = 0.0;                        // squared degrees
  std::vector<double> error_series;              // per-segment tracking errors
  std::vector<std::pair<double, double>> ccdf;   // (threshold, P(error > threshold)) corners
  std::string fingerprint;
};

// Empirical complementary CDF as step-function corners: for each distinct
// value v, (v, P(X >= v)) then (v, P(X > v)). Starts at 1, ends at 0,
// non-increasing.
inline std::vector<std::pair<double, double>> ccdf(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("ccdf: empty series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.emplace_back(sorted[i], static_cast<double>(sorted.size() - i) / n);
    out.emplace_back(sorted[i], static_cast<double>(sorted.size() - j) / n);
    i = j;
  }
  return out;
}

inline double ccdf_at(std::span<const double> series, double x) {
  if (series.empty()) throw std::invalid_argument("ccdf_at: empty series");
  std::size_t count = 0;
  for (double v : series)
    if (v > x) ++count;
  return static_cast<double>(count) / static_cast<double>(series.size());
}

// No sampling, no prediction: the twin replays the raw trajectory delayed by
// the E2E latency at full load. Errors are windowed over fixed 50-slot
// segments so the series is comparable with policy runs.
inline EvalReport run_baseline(const Trajectory& traj, int e2e_delay_slots) {
  if (e2e_delay_slots < 0) throw std::invalid_argument("run_baseline: negative delay");
  if (e2e_delay_slots >= traj.size())
    throw std::invalid_argument("run_baseline: delay >= trajectory length");
  constexpr int kWindow = 50;
  EvalReport rep;
  rep.normalized_load = 1.0;
  double acc = 0.0;
  for (std::int64_t start = e2e_delay_slots; start + kWindow <= traj.size(); start += kWindow) {
    double w_acc = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double d = traj.samples[static_cast<std::size_t>(start + i)] -
                       traj.samples[static_cast<std::size_t>(start + i - e2e_delay_slots)];
      w_acc += d * d;
    }
    rep.error_series.push_back(w_acc / kWindow);
    acc += w_acc / kWindow;
  }
  if (rep.error_series.empty())
    throw std::invalid_argument("run_baseline: trajectory too short for one window");
  rep.avg_error = acc / static_cast<double>(rep.error_series.size());
  rep.ccdf = ccdf(rep.error_series);
  return rep;
}

// Constant-action policy, averaged over seeded repeats (Fig. 6/7 style).
inline EvalReport run_fixed_policy(const Trajectory& traj, int w, int n,
                                   const ChannelConfig& channel, const PredictorModel& predictor,
                                   int repeats, std::uint64_t seed, int warmup_w = 50,
                                   int warmup_n = 50) {
  if (repeats < 1) throw std::invalid_argument("run_fixed_policy: repeats < 1");
  EnvConfig cfg;
  cfg.trajectory = traj;
  cfg.channel = channel;
  cfg.predictor = predictor;
  cfg.w_max = w;  // fixed-W episode; also validates w <= h_max/2 and w >= d_max
  cfg.warmup_w = warmup_w;
  cfg.warmup_n = warmup_n;
  Environment env(cfg);

  EvalReport rep;
  double load_acc = 0.0;
  std::int64_t steps = 0;
  for (int rep_i = 0; rep_i < repeats; ++rep_i) {
    Rng rng = make_stream(seed, "fixed-policy", static_cast<std::uint64_t>(rep_i));
    env.reset(rng);
    while (!env.done()) {
      const StepOutcome out = env.step(Action{w, n}, rng);
      rep.error_series.push_back(out.cost);
      load_acc += out.info.load;
      ++steps;
    }
  }
  rep.normalized_load = load_acc / static_cast<double>(steps);
  double err_acc = 0.0;
  for (double e : rep.error_series) err_acc += e;
  rep.avg_error = err_acc / static_cast<double>(rep.error_series.size());
  rep.ccdf = ccdf(rep.error_series);
  return rep;
}

struct BenchGrid {
  std::vector<int> w_values{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int n_step = 2;
};

struct SurfaceCell {
  int w = 0;
  int n = 0;
  double load = 0.0;
  double avg_error = 0.0;
};

// Every feasible (W, n) grid cell; n starts at the channel's outage floor.
inline std::vector<SurfaceCell> scan_fixed_policy_surface(
    const Trajectory& traj, const ChannelConfig& channel, const PredictorModel& predictor,
    const BenchGrid& grid, int repeats, std::uint64_t seed) {
  if (grid.w_values.empty() || grid.n_step < 1)
    throw std::invalid_argument("scan_fixed_policy_surface: empty grid");
  const int w_smallest = *std::min_element(grid.w_values.begin(), grid.w_values.end());
  const int n_floor =
      std::max(2, min_samples_capped(channel.p_loss, channel.outage_target, w_smallest));
  std::vector<SurfaceCell> surface;
  for (int w : grid.w_values) {
    for (int n = n_floor; n <= w; n += grid.n_step) {
      const EvalReport r = run_fixed_policy(traj, w, n, channel, predictor, repeats,
                                            derive_seed(seed, "surface", fnv1a64(std::to_string(w) + "," + std::to_string(n))));
      surface.push_back(SurfaceCell{w, n, r.normalized_load, r.avg_error});
    }
  }
  if (surface.empty())
    throw std::invalid_argument("scan_fixed_policy_surface: no feasible grid cell");
  return surface;
}

struct SearchResult {
  bool feasible = false;
  int w = 0;
  int n = 0;
  EvalReport report;        // filled for the optimum when feasible
  double best_error = 0.0;  // smallest error seen; reported when infeasible
  std::vector<SurfaceCell> surface;
};

// Minimum-load grid point subject to avg_error <= gamma_c; the surface scan
// itself is the optimality certificate.
inline SearchResult exhaustive_search(const Trajectory& traj, double gamma_c,
                                      const ChannelConfig& channel,
                                      const PredictorModel& predictor, const BenchGrid& grid,
                                      int repeats, std::uint64_t seed) {
  SearchResult res;
  res.surface = scan_fixed_policy_surface(traj, channel, predictor, grid, repeats, seed);
  res.best_error = res.surface.front().avg_error;
  const SurfaceCell* best = nullptr;
  for (const auto& cell : res.surface) {
    res.best_error = std::min(res.best_error, cell.avg_error);
    if (cell.avg_error > gamma_c) continue;
    if (!best || cell.load < best->load ||
        (cell.load == best->load && (cell.avg_error < best->avg_error ||
                                     (cell.avg_error == best->avg_error && cell.w < best->w))))
      best = &cell;
  }
  if (!best) return res;  // infeasible: feasible=false, best_error reported
  res.feasible = true;
  res.w = best->w;
  res.n = best->n;
  res.report = run_fixed_policy(
      traj, best->w, best->n, channel, predictor, repeats,
      derive_seed(seed, "surface", fnv1a64(std::to_string(best->w) + "," + std::to_string(best->n))));
  return res;
}

// Deterministic evaluation rollouts (sigma = 0) of a trained policy.
inline EvalReport evaluate_agent(const Agent& agent, Environment& env, int episodes,
                                 std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate_agent: episodes < 1");
  const bool reduce = agent.config().ablations.state_reduction;
  const double scale = effective_state_scale(agent.config());
  EvalReport rep;
  double load_acc = 0.0;
  std::int64_t steps = 0;
  Rng no_noise(0);
  for (int e = 0; e < episodes; ++e) {
    Rng rng = make_stream(seed, "eval-episode", static_cast<std::uint64_t>(e));
    StepOutcome out = env.reset(rng);
    std::vector<double> s = state_of(out, reduce, scale);
    while (!out.done) {
      const std::array<double, 2> raw = agent.act(s, 0.0, no_noise);
      const Action action =
          denormalize_action(raw, env.n_min(), env.config().channel.d_max, env.config().w_max,
                             agent.config().ablations.action_norm);
      out = env.step(action, rng);
      s = state_of(out, reduce, scale);
      rep.error_series.push_back(out.cost);
      load_acc += out.info.load;
      ++steps;
    }
  }
  rep.normalized_load = load_acc / static_cast<double>(steps);
  double err_acc = 0.0;
  for (double v : rep.error_series) err_acc += v;
  rep.avg_error = err_acc / static_cast<double>(rep.error_series.size());
  rep.ccdf = ccdf(rep.error_series);
  return rep;
}

struct TradeoffRow {
  double gamma_c = 0.0;
  double p_loss = 0.0;
  double load = 0.0;
  double avg_error = 0.0;
};

// Evaluation-mode load/error of the trained agent per (Gamma_c, p_loss) cell
// (Fig. 10 style). The lookup must supply an agent for every cell.
inline std::vector<TradeoffRow> tradeoff_sweep(
    const Trajectory& traj, const PredictorModel& predictor, const ChannelConfig& base_channel,
    std::span<const double> gamma_c_list, std::span<const double> p_loss_list,
    const std::function<const Agent*(double gamma_c, double p_loss)>& agent_lookup,
    int eval_episodes, std::uint64_t seed, int w_max = 100, int warmup_w = 50, int warmup_n = 50) {
  if (gamma_c_list.empty() || p_loss_list.empty())
    throw std::invalid_argument("tradeoff_sweep: empty sweep lists");
  std::vector<TradeoffRow> rows;
  for (double gc : gamma_c_list) {
    for (double p : p_loss_list) {
      const Agent* agent = agent_lookup(gc, p);
      if (!agent) throw std::runtime_error("tradeoff_sweep: missing agent for gamma_c=" +
                                           std::to_string(gc) + ", p_loss=" + std::to_string(p));
      EnvConfig cfg;
      cfg.trajectory = traj;
      cfg.channel = base_channel;
      cfg.channel.p_loss = p;
      cfg.predictor = predictor;
      cfg.w_max = w_max;
      cfg.warmup_w = warmup_w;
      cfg.warmup_n = warmup_n;
      Environment env(cfg);
      const EvalReport rep = evaluate_agent(*agent, env, eval_episodes,
                                            derive_seed(seed, "tradeoff", fnv1a64(std::to_string(gc) + "|" + std::to_string(p))));
      rows.push_back(TradeoffRow{gc, p, rep.normalized_load, rep.avg_error});
    }
  }
  return rows;
}

}  // namespace twinsync
