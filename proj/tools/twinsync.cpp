// Command-line front end: synthesize traces, train the predictor and the
// policy, evaluate checkpoints, and emit the benchmark tables.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twinsync/bench.hpp"
#include "twinsync/channel.hpp"
#include "twinsync/env.hpp"
#include "twinsync/io.hpp"
#include "twinsync/kctd3.hpp"
#include "twinsync/predictor.hpp"
#include "twinsync/run_config.hpp"
#include "twinsync/signal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace twinsync;

namespace {

struct CliArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma_c;
  std::optional<double> p_loss;
  std::optional<int> e2e_delay;
  std::string trace_path;
  std::string predictor_path;
  std::string agent_path;
};

void add_common_options(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration");
  cmd->add_option("--seed", args.seed, "root seed (overrides config)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--gamma-c", args.gamma_c, "tracking-error constraint, deg^2 (overrides config)");
  cmd->add_option("--p-loss", args.p_loss, "packet loss probability (overrides config)");
  cmd->add_option("--e2e-delay", args.e2e_delay, "baseline E2E delay in slots (overrides config)");
  cmd->add_option("--trace", args.trace_path, "trace CSV (overrides config)");
  cmd->add_option("--predictor", args.predictor_path, "predictor checkpoint (overrides config)");
  cmd->add_option("--agent", args.agent_path, "agent checkpoint (overrides config)");
}

[[noreturn]] void fail_config(const std::vector<std::string>& violations) {
  json err = {{"error", "invalid config"}, {"violations", violations}};
  std::cerr << err.dump() << "\n";
  std::exit(2);
}

RunConfig effective_config(const CliArgs& args) {
  json j = json::object();
  if (!args.config_path.empty()) j = json::parse(read_text_file(args.config_path));
  std::vector<std::string> violations;
  RunConfig cfg = parse_run_config(j, violations);
  if (!violations.empty()) fail_config(violations);

  if (args.seed) cfg.seed = *args.seed;
  if (args.gamma_c) cfg.agent.gamma_c = *args.gamma_c;
  if (args.p_loss) cfg.channel.p_loss = *args.p_loss;
  if (args.e2e_delay) cfg.e2e_delay = *args.e2e_delay;
  if (!args.trace_path.empty()) cfg.trace_csv = args.trace_path;
  if (!args.predictor_path.empty()) cfg.predictor_checkpoint = args.predictor_path;
  if (!args.agent_path.empty()) cfg.agent_checkpoint = args.agent_path;

  // Flag overrides go through the same validation as file values.
  violations.clear();
  RunConfig checked = parse_run_config(run_config_to_json(cfg), violations);
  if (!violations.empty()) fail_config(violations);
  return checked;
}

// All randomness flows from the root seed through named streams, so each
// command can be re-run in isolation.
void wire_seeds(RunConfig& cfg) {
  cfg.synth.seed = derive_seed(cfg.seed, "trace");
  cfg.channel.seed = derive_seed(cfg.seed, "channel");
  cfg.pred_train.seed = derive_seed(cfg.seed, "predictor");
  cfg.agent.seed = derive_seed(cfg.seed, "agent");
}

Trajectory get_trajectory(const RunConfig& cfg) {
  if (!cfg.trace_csv.empty()) return load_trace(cfg.trace_csv);
  return synthesize_trace(cfg.synth);
}

PredictorModel load_predictor_checkpoint(const RunConfig& cfg) {
  if (cfg.predictor_checkpoint.empty())
    throw std::runtime_error("predictor checkpoint required (run train-predictor, then pass "
                             "--predictor or set predictor.checkpoint)");
  return predictor_from_json(json::parse(read_text_file(cfg.predictor_checkpoint)));
}

Agent load_agent_checkpoint(const RunConfig& cfg) {
  if (cfg.agent_checkpoint.empty())
    throw std::runtime_error("agent checkpoint required (run train-policy, then pass --agent or "
                             "set agent.checkpoint)");
  return agent_from_json(json::parse(read_text_file(cfg.agent_checkpoint)), cfg.agent);
}

EnvConfig make_env_config(const RunConfig& cfg, Trajectory traj, PredictorModel predictor) {
  EnvConfig env_cfg;
  env_cfg.trajectory = std::move(traj);
  env_cfg.channel = cfg.channel;
  env_cfg.predictor = std::move(predictor);
  env_cfg.w_max = cfg.w_max;
  env_cfg.warmup_w = cfg.warmup_w;
  env_cfg.warmup_n = cfg.warmup_n;
  env_cfg.emit_raw_state = !cfg.agent.ablations.state_reduction;
  return env_cfg;
}

std::string out_path(const CliArgs& args, const std::string& name) {
  fs::create_directories(args.out_dir);
  return (fs::path(args.out_dir) / name).string();
}

void write_report_files(const CliArgs& args, const std::string& prefix, const EvalReport& rep,
                        const std::string& fp, const json& extra_summary = json::object()) {
  json summary = {{"fingerprint", fp},
                  {"normalized_load", rep.normalized_load},
                  {"avg_error", rep.avg_error},
                  {"segments", rep.error_series.size()}};
  for (auto it = extra_summary.begin(); it != extra_summary.end(); ++it)
    summary[it.key()] = it.value();
  write_text_file(out_path(args, prefix + "_summary.json"), summary.dump(2) + "\n");

  CsvWriter series(out_path(args, prefix + "_error_series.csv"), {"segment", "error"}, fp);
  for (std::size_t i = 0; i < rep.error_series.size(); ++i)
    series.row({format_int(static_cast<std::int64_t>(i)), format_double(rep.error_series[i])});

  CsvWriter tail(out_path(args, prefix + "_ccdf.csv"), {"threshold", "prob_exceed"}, fp);
  for (const auto& [x, p] : rep.ccdf) tail.row({format_double(x), format_double(p)});
}

int cmd_synth(const CliArgs& args) {
  RunConfig cfg = effective_config(args);
  wire_seeds(cfg);
  const std::string fp = config_fingerprint(cfg);
  const Trajectory traj = synthesize_trace(cfg.synth);
  save_trace(traj, out_path(args, "trace.csv"), "# fingerprint=" + fp);
  std::cout << "wrote " << out_path(args, "trace.csv") << " (" << traj.size() << " slots)\n";
  return 0;
}

int cmd_train_predictor(const CliArgs& args) {
  RunConfig cfg = effective_config(args);
  wire_seeds(cfg);
  const std::string fp = config_fingerprint(cfg);
  const Trajectory traj = get_trajectory(cfg);
  const int l_in = cfg.pred_l_in > 0
                       ? cfg.pred_l_in
                       : static_cast<int>(estimate_decorrelation_time(traj, cfg.decorr_threshold));
  const WindowDataset ds = build_dataset(traj, l_in, cfg.pred_h_max);
  const PredictorTrainResult res = train_predictor(ds, cfg.pred_train);

  json ckpt = predictor_to_json(res.model);
  ckpt["fingerprint"] = fp;
  write_text_file(out_path(args, "predictor.json"), ckpt.dump() + "\n");
  CsvWriter loss(out_path(args, "predictor_loss.csv"), {"epoch", "mse_deg2"}, fp);
  for (std::size_t i = 0; i < res.epoch_loss.size(); ++i)
    loss.row({format_int(static_cast<std::int64_t>(i) + 1), format_double(res.epoch_loss[i])});
  std::cout << "trained predictor: l_in=" << l_in << " h_max=" << cfg.pred_h_max
            << " final_mse=" << format_double(res.final_loss) << " deg^2\n";
  return 0;
}

int cmd_train_policy(const CliArgs& args) {
  RunConfig cfg = effective_config(args);
  wire_seeds(cfg);
  const std::string fp = config_fingerprint(cfg);
  const Trajectory traj = get_trajectory(cfg);
  const PredictorModel predictor = load_predictor_checkpoint(cfg);
  Environment env(make_env_config(cfg, traj, predictor));
  const TrainResult res = train(env, cfg.agent);

  json ckpt = agent_to_json(res.agent, fp);
  write_text_file(out_path(args, "agent.json"), ckpt.dump() + "\n");
  CsvWriter log(out_path(args, "training_log.csv"),
                {"episode", "mean_load", "mean_cost", "lambda"}, fp);
  for (const auto& ep : res.log.episodes)
    log.row({format_int(ep.episode), format_double(ep.mean_load), format_double(ep.mean_cost),
             format_double(ep.lambda)});
  if (!res.log.episodes.empty()) {
    const auto& last = res.log.episodes.back();
    std::cout << "trained policy: episodes=" << res.log.episodes.size()
              << " final_load=" << format_double(last.mean_load)
              << " final_cost=" << format_double(last.mean_cost)
              << " lambda=" << format_double(last.lambda) << "\n";
  } else {
    std::cout << "trained policy: 0 episodes (checkpoint is the initialization)\n";
  }
  return 0;
}

int cmd_evaluate(const CliArgs& args) {
  RunConfig cfg = effective_config(args);
  wire_seeds(cfg);
  const std::string fp = config_fingerprint(cfg);
  const Trajectory traj = get_trajectory(cfg);
  const PredictorModel predictor = load_predictor_checkpoint(cfg);
  const Agent agent = load_agent_checkpoint(cfg);
  Environment env(make_env_config(cfg, traj, predictor));
  const EvalReport rep =
      evaluate_agent(agent, env, cfg.eval_episodes, derive_seed(cfg.seed, "eval"));
  write_report_files(args, "eval", rep, fp,
                     {{"gamma_c", cfg.agent.gamma_c},
                      {"p_loss", cfg.channel.p_loss},
                      {"episodes", cfg.eval_episodes},
                      {"lambda", agent.lambda()}});

  // Per-step log of one deterministic rollout.
  CsvWriter steps(out_path(args, "eval_steps.csv"),
                  {"step", "W", "n", "reward", "cost", "outage", "cursor_slot"}, fp);
  Rng rng = make_stream(derive_seed(cfg.seed, "eval"), "step-log");
  Rng no_noise(0);
  const double scale = effective_state_scale(cfg.agent);
  StepOutcome out = env.reset(rng);
  std::vector<double> s = state_of(out, cfg.agent.ablations.state_reduction, scale);
  std::int64_t step = 0;
  while (!out.done) {
    const auto raw = agent.act(s, 0.0, no_noise);
    const Action action = denormalize_action(raw, env.n_min(), cfg.channel.d_max, cfg.w_max,
                                             cfg.agent.ablations.action_norm);
    out = env.step(action, rng);
    s = state_of(out, cfg.agent.ablations.state_reduction, scale);
    steps.row({format_int(step), format_int(out.info.w), format_int(out.info.n),
               format_double(out.reward), format_double(out.cost),
               out.info.outage ? "1" : "0", format_int(out.info.cursor_slot)});
    ++step;
  }
  std::cout << "evaluated: load=" << format_double(rep.normalized_load)
            << " avg_error=" << format_double(rep.avg_error) << " deg^2\n";
  return 0;
}

int cmd_baseline(const CliArgs& args) {
  RunConfig cfg = effective_config(args);
  wire_seeds(cfg);
  const std::string fp = config_fingerprint(cfg);
  const Trajectory traj = get_trajectory(cfg);
  const EvalReport rep = run_baseline(traj, cfg.e2e_delay);
  write_report_files(args, "baseline", rep, fp, {{"e2e_delay", cfg.e2e_delay}});
  std::cout << "baseline: load=1 avg_error=" << format_double(rep.avg_error) << " deg^2\n";
  return 0;
}

int cmd_sweep(const CliArgs& args) {
  RunConfig cfg = effective_config(args);
  wire_seeds(cfg);
  const std::string fp = config_fingerprint(cfg);
  const Trajectory traj = get_trajectory(cfg);
  const PredictorModel predictor = load_predictor_checkpoint(cfg);

  // Fixed-policy surface (Figs. 6-7 analog).
  const auto surface = scan_fixed_policy_surface(traj, cfg.channel, predictor, cfg.grid,
                                                 cfg.repeats, derive_seed(cfg.seed, "surface"));
  CsvWriter surf(out_path(args, "surface.csv"), {"W", "n", "load", "avg_error"}, fp);
  for (const auto& cell : surface)
    surf.row({format_int(cell.w), format_int(cell.n), format_double(cell.load),
              format_double(cell.avg_error)});

  // Static optimum at the configured constraint (Table II analog).
  const SearchResult search = exhaustive_search(traj, cfg.agent.gamma_c, cfg.channel, predictor,
                                                cfg.grid, cfg.repeats,
                                                derive_seed(cfg.seed, "surface"));
  json search_json = {{"fingerprint", fp},
                      {"gamma_c", cfg.agent.gamma_c},
                      {"feasible", search.feasible},
                      {"best_error", search.best_error}};
  if (search.feasible) {
    search_json["W"] = search.w;
    search_json["n"] = search.n;
    search_json["load"] = search.report.normalized_load;
    search_json["avg_error"] = search.report.avg_error;
  }
  write_text_file(out_path(args, "exhaustive.json"), search_json.dump(2) + "\n");

  // Trade-off table (Fig. 10 analog): one agent per (gamma_c, p_loss) cell.
  std::vector<double> gamma_cs = cfg.gamma_c_list;
  if (gamma_cs.empty()) gamma_cs = {cfg.agent.gamma_c};
  std::vector<std::pair<std::pair<double, double>, Agent>> agents;
  std::uint64_t combo = 0;
  for (double gc : gamma_cs) {
    for (double p : cfg.p_loss_list) {
      RunConfig combo_cfg = cfg;
      combo_cfg.agent.gamma_c = gc;
      combo_cfg.channel.p_loss = p;
      combo_cfg.channel.seed = derive_seed(cfg.seed, "channel", combo);
      combo_cfg.agent.seed = derive_seed(cfg.seed, "agent", combo);
      Environment env(make_env_config(combo_cfg, traj, predictor));
      std::cout << "training sweep agent " << (combo + 1) << "/"
                << gamma_cs.size() * cfg.p_loss_list.size() << " (gamma_c=" << format_double(gc)
                << ", p_loss=" << format_double(p) << ")\n";
      TrainResult res = train(env, combo_cfg.agent);
      agents.emplace_back(std::make_pair(gc, p), std::move(res.agent));
      ++combo;
    }
  }
  const auto rows = tradeoff_sweep(
      traj, predictor, cfg.channel, gamma_cs, cfg.p_loss_list,
      [&](double gc, double p) -> const Agent* {
        for (const auto& [key, agent] : agents)
          if (key.first == gc && key.second == p) return &agent;
        return nullptr;
      },
      cfg.eval_episodes, derive_seed(cfg.seed, "eval"), cfg.w_max, cfg.warmup_w, cfg.warmup_n);
  CsvWriter tradeoff(out_path(args, "tradeoff.csv"),
                     {"gamma_c", "p_loss", "load", "avg_error"}, fp);
  for (const auto& row : rows)
    tradeoff.row({format_double(row.gamma_c), format_double(row.p_loss),
                  format_double(row.load), format_double(row.avg_error)});
  std::cout << "sweep done: " << surface.size() << " surface cells, " << rows.size()
            << " trade-off rows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-communication-prediction co-design simulator and trainer"};
  app.require_subcommand(1);
  CliArgs args;

  CLI::App* synth = app.add_subcommand("synth", "synthesize a trace CSV");
  CLI::App* train_pred =
      app.add_subcommand("train-predictor", "train the trajectory predictor on a trace");
  CLI::App* train_pol = app.add_subcommand("train-policy", "train the KC-TD3 policy");
  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a trained agent checkpoint");
  CLI::App* baseline = app.add_subcommand("baseline", "full-rate no-prediction baseline report");
  CLI::App* sweep =
      app.add_subcommand("sweep", "fixed-policy surface, exhaustive search, trade-off table");
  for (CLI::App* cmd : {synth, train_pred, train_pol, evaluate, baseline, sweep})
    add_common_options(cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(args);
    if (train_pred->parsed()) return cmd_train_predictor(args);
    if (train_pol->parsed()) return cmd_train_policy(args);
    if (evaluate->parsed()) return cmd_evaluate(args);
    if (baseline->parsed()) return cmd_baseline(args);
    if (sweep->parsed()) return cmd_sweep(args);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
