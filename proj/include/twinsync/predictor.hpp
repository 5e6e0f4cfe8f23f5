#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinsync/nn.hpp"
#include "twinsync/rng.hpp"
#include "twinsync/signal.hpp"

namespace twinsync {

// Sliding-window supervision (stride 1): l_in past samples -> h_max future
// samples. Normalization stats come from the history entries.
struct WindowDataset {
  int l_in = 0;
  int h_max = 0;
  std::int64_t rows = 0;
  std::vector<double> history;  // rows x l_in, row-major
  std::vector<double> future;   // rows x h_max, row-major
  double mean = 0.0;
  double scale = 1.0;

  std::span<const double> history_row(std::int64_t r) const {
    return std::span<const double>(history.data() + r * l_in, static_cast<std::size_t>(l_in));
  }
  std::span<const double> future_row(std::int64_t r) const {
    return std::span<const double>(future.data() + r * h_max, static_cast<std::size_t>(h_max));
  }
};

inline WindowDataset build_dataset(const Trajectory& traj, int l_in, int h_max) {
  if (l_in < 1 || h_max < 1) throw std::invalid_argument("build_dataset: l_in/h_max < 1");
  const std::int64_t window = static_cast<std::int64_t>(l_in) + h_max;
  if (traj.size() < window)
    throw std::invalid_argument("build_dataset: trajectory length " + std::to_string(traj.size()) +
                                " shorter than l_in + h_max = " + std::to_string(window));
  WindowDataset ds;
  ds.l_in = l_in;
  ds.h_max = h_max;
  ds.rows = traj.size() - window + 1;
  ds.history.resize(static_cast<std::size_t>(ds.rows * l_in));
  ds.future.resize(static_cast<std::size_t>(ds.rows * h_max));
  for (std::int64_t r = 0; r < ds.rows; ++r) {
    const double* src = traj.samples.data() + r;
    std::copy(src, src + l_in, ds.history.data() + r * l_in);
    std::copy(src + l_in, src + window, ds.future.data() + r * h_max);
  }
  double mean = 0.0;
  for (double v : ds.history) mean += v;
  mean /= static_cast<double>(ds.history.size());
  double var = 0.0;
  for (double v : ds.history) var += (v - mean) * (v - mean);
  var /= static_cast<double>(ds.history.size());
  const double std_dev = std::sqrt(var);
  ds.mean = mean;
  ds.scale = std_dev > 1e-9 ? std_dev : 1.0;
  return ds;
}

// f_P: l_in reconstructed samples in, h_max future samples out. The output
// head is fixed at h_max; shorter horizons take the prefix, so one model
// serves every segment-length action.
struct PredictorModel {
  DenseNet net;
  int l_in = 0;
  int h_max = 0;
  double mean = 0.0;
  double scale = 1.0;

  void validate() const {
    net.validate();
    if (net.in_dim() != l_in) throw std::invalid_argument("PredictorModel: in_dim != l_in");
    if (net.out_dim() != h_max) throw std::invalid_argument("PredictorModel: out_dim != h_max");
    if (!(scale > 0)) throw std::invalid_argument("PredictorModel: scale <= 0");
  }
};

struct PredictorTrainConfig {
  int epochs = 25;
  int batch = 64;
  double learning_rate = 1e-3;
  std::vector<int> hidden{128, 128};
  std::uint64_t seed = 0;
};

struct PredictorTrainResult {
  PredictorModel model;
  std::vector<double> epoch_loss;  // mean squared error per epoch, deg^2
  double final_loss = 0.0;
};

namespace detail {

inline double dataset_loss(const WindowDataset& ds, const PredictorModel& model) {
  ForwardTrace tr;
  std::vector<double> xn(static_cast<std::size_t>(ds.l_in));
  double acc = 0.0;
  for (std::int64_t r = 0; r < ds.rows; ++r) {
    const auto x = ds.history_row(r);
    const auto y = ds.future_row(r);
    for (int i = 0; i < ds.l_in; ++i) xn[static_cast<std::size_t>(i)] = (x[i] - ds.mean) / ds.scale;
    forward_trace(model.net, xn, tr);
    const auto out = tr.output();
    double row_acc = 0.0;
    for (int i = 0; i < ds.h_max; ++i) {
      const double d = out[static_cast<std::size_t>(i)] - (y[i] - ds.mean) / ds.scale;
      row_acc += d * d;
    }
    acc += row_acc / static_cast<double>(ds.h_max);
  }
  return acc / static_cast<double>(ds.rows) * ds.scale * ds.scale;
}

}  // namespace detail

inline PredictorTrainResult train_predictor(const WindowDataset& ds,
                                            const PredictorTrainConfig& cfg) {
  if (ds.rows < 1) throw std::invalid_argument("train_predictor: empty dataset");
  if (cfg.batch < 1) throw std::invalid_argument("train_predictor: batch < 1");
  if (cfg.epochs < 0) throw std::invalid_argument("train_predictor: negative epochs");

  Rng rng = make_stream(cfg.seed, "predictor-init");
  Rng shuffle_rng = make_stream(cfg.seed, "predictor-shuffle");

  PredictorTrainResult res;
  res.model.l_in = ds.l_in;
  res.model.h_max = ds.h_max;
  res.model.mean = ds.mean;
  res.model.scale = ds.scale;
  res.model.net = make_mlp(ds.l_in, cfg.hidden, ds.h_max, Act::Relu, Act::Identity, rng);

  if (cfg.epochs == 0) {
    res.final_loss = detail::dataset_loss(ds, res.model);
    return res;
  }

  OptState opt = make_opt_state(res.model.net, cfg.learning_rate);
  NetGrads grads;
  grads.init_like(res.model.net);
  BatchRunner runner;
  std::vector<double> xn(static_cast<std::size_t>(cfg.batch) * ds.l_in);
  std::vector<double> upstream(static_cast<std::size_t>(cfg.batch) * ds.h_max);
  std::vector<std::int64_t> order(static_cast<std::size_t>(ds.rows));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the seeded stream; deterministic per seed.
    for (std::int64_t i = ds.rows - 1; i > 0; --i) {
      const std::int64_t j = shuffle_rng.uniform_int(0, i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    double epoch_acc = 0.0;
    std::int64_t done = 0;
    while (done < ds.rows) {
      const int bsz = static_cast<int>(std::min<std::int64_t>(cfg.batch, ds.rows - done));
      grads.zero();
      for (int bi = 0; bi < bsz; ++bi) {
        const auto x = ds.history_row(order[static_cast<std::size_t>(done + bi)]);
        double* row = xn.data() + static_cast<std::size_t>(bi) * ds.l_in;
        for (int i = 0; i < ds.l_in; ++i) row[i] = (x[i] - ds.mean) / ds.scale;
      }
      runner.forward(res.model.net,
                     std::span<const double>(xn.data(), static_cast<std::size_t>(bsz) * ds.l_in),
                     bsz);
      const auto out = runner.output();
      double batch_acc = 0.0;
      const double upstream_scale = 2.0 / (static_cast<double>(ds.h_max) * bsz);
      for (int bi = 0; bi < bsz; ++bi) {
        const auto y = ds.future_row(order[static_cast<std::size_t>(done + bi)]);
        double row_acc = 0.0;
        for (int i = 0; i < ds.h_max; ++i) {
          const std::size_t k = static_cast<std::size_t>(bi) * ds.h_max + i;
          const double d = out[k] - (y[i] - ds.mean) / ds.scale;
          row_acc += d * d;
          upstream[k] = d * upstream_scale;
        }
        batch_acc += row_acc / static_cast<double>(ds.h_max);
      }
      runner.backward(res.model.net,
                      std::span<const double>(upstream.data(),
                                              static_cast<std::size_t>(bsz) * ds.h_max),
                      &grads, nullptr);
      opt_step(res.model.net, grads, opt);
      epoch_acc += batch_acc;
      done += bsz;
    }
    const double loss = epoch_acc / static_cast<double>(ds.rows) * ds.scale * ds.scale;
    if (!std::isfinite(loss)) throw std::runtime_error("train_predictor: loss diverged");
    res.epoch_loss.push_back(loss);
  }
  res.final_loss = res.epoch_loss.back();
  return res;
}

// Forward pass on normalized history, de-normalized and truncated to the
// requested horizon (prefix of the fixed h_max head).
inline std::vector<double> predict(const PredictorModel& model, std::span<const double> history,
                                   int horizon) {
  if (static_cast<int>(history.size()) != model.l_in)
    throw std::invalid_argument("predict: history length != l_in");
  if (horizon < 1 || horizon > model.h_max)
    throw std::invalid_argument("predict: horizon " + std::to_string(horizon) +
                                " outside [1, h_max=" + std::to_string(model.h_max) + "]");
  std::vector<double> xn(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) xn[i] = (history[i] - model.mean) / model.scale;
  std::vector<double> out = forward(model.net, xn);
  out.resize(static_cast<std::size_t>(horizon));
  for (double& v : out) v = v * model.scale + model.mean;
  return out;
}

inline nlohmann::json predictor_to_json(const PredictorModel& model) {
  return {{"format", "twinsync-predictor-v1"},
          {"l_in", model.l_in},
          {"h_max", model.h_max},
          {"mean", model.mean},
          {"scale", model.scale},
          {"net", net_to_json(model.net)}};
}

inline PredictorModel predictor_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "twinsync-predictor-v1")
    throw std::runtime_error("predictor_from_json: unknown checkpoint format");
  PredictorModel m;
  m.l_in = j.at("l_in").get<int>();
  m.h_max = j.at("h_max").get<int>();
  m.mean = j.at("mean").get<double>();
  m.scale = j.at("scale").get<double>();
  m.net = net_from_json(j.at("net"));
  m.validate();
  return m;
}

}  // namespace twinsync
