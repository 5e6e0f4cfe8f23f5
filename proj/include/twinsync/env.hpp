#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinsync/channel.hpp"
#include "twinsync/dsp.hpp"
#include "twinsync/predictor.hpp"
#include "twinsync/signal.hpp"

namespace twinsync {

// (W_{k+1}, n_{k+1}): length of the next segment and the number of packets
// sent for it.
struct Action {
  int w_next = 0;
  int n_next = 0;
};

struct StepInfo {
  double load = 0.0;  // n/W for this segment
  bool outage = false;
  int w = 0;
  int n = 0;
  std::int64_t cursor_slot = 0;      // cursor after this step
  std::int64_t slots_consumed = 0;   // cumulative action slots since reset
  int implied_horizon = 0;           // W_k + W_{k+1}, the two-segment span
};

struct StepOutcome {
  double reduced_state = 0.0;  // e(k): tracking error of the newest segment
  double reward = 0.0;         // -n/W
  double cost = 0.0;           // e(k+1)
  std::vector<double> raw_state;  // last l_in reconstructed values (ablation input)
  bool done = false;
  StepInfo info;
};

struct EnvConfig {
  Trajectory trajectory;
  ChannelConfig channel;
  PredictorModel predictor;
  int w_max = 100;
  int warmup_w = 50;
  int warmup_n = 50;
  bool emit_raw_state = false;

  int w_min() const { return channel.d_max; }

  void validate() const {
    trajectory.validate();
    channel.validate();
    predictor.validate();
    if (w_min() < 2) throw std::invalid_argument("EnvConfig: w_min (= d_max) < 2");
    if (w_max < w_min()) throw std::invalid_argument("EnvConfig: w_max < w_min");
    if (2 * w_max > predictor.h_max)
      throw std::invalid_argument(
          "EnvConfig: w_max > h_max/2; the predictor cannot cover two segments");
    if (warmup_w < 2 || warmup_n < 2 || warmup_n > warmup_w)
      throw std::invalid_argument("EnvConfig: bad warmup (W0, n0)");
    const int n_floor = min_samples_capped(channel.p_loss, channel.outage_target, w_min());
    if (warmup_n < n_floor)
      throw std::invalid_argument("EnvConfig: warmup n0 below the outage floor N_min");
  }
};

// Maps the normalized actor output ([-1,1] tanh head, [0,1] sigmoid head)
// onto a feasible (W, n). With interdependent normalization the n head is a
// fraction of the chosen W; without it, a fraction of W_max.
inline Action denormalize_action(const std::array<double, 2>& raw, int n_min, int d_max,
                                 int w_max, bool interdependent = true) {
  if (!std::isfinite(raw[0]) || !std::isfinite(raw[1]))
    throw std::invalid_argument("denormalize_action: non-finite input");
  const double w_real =
      d_max + (raw[0] + 1.0) / 2.0 * static_cast<double>(w_max - d_max);
  int w = static_cast<int>(std::llround(w_real));
  w = std::clamp(w, d_max, w_max);
  const double n_scale = interdependent ? static_cast<double>(w) : static_cast<double>(w_max);
  int n = static_cast<int>(std::llround(raw[1] * n_scale));
  n = std::clamp(n, std::max(2, n_min), w);
  return {w, n};
}

// Inverse map of the executed action back onto the normalized box. The n
// head is the executed sampling ratio n/W (or n/W_max under the ablation),
// so replayed actions land where the clamps put them rather than where the
// raw policy output pointed.
inline std::array<double, 2> normalize_action(const Action& action, int d_max, int w_max,
                                              bool interdependent = true) {
  const double a1 =
      w_max == d_max
          ? -1.0
          : 2.0 * static_cast<double>(action.w_next - d_max) / (w_max - d_max) - 1.0;
  const double denom = interdependent ? static_cast<double>(action.w_next)
                                      : static_cast<double>(w_max);
  return {a1, static_cast<double>(action.n_next) / denom};
}

// One agent step = one trajectory segment: slice, decimate, transmit,
// reconstruct (hold the last known value across a whole lost segment),
// predict the segment from history ending at its start, and score it.
class Environment {
 public:
  explicit Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    // Capped at the smallest legal segment so the action range is never empty.
    n_min_ = std::max(
        2, min_samples_capped(cfg_.channel.p_loss, cfg_.channel.outage_target, cfg_.w_min()));
    const std::int64_t needed = min_trajectory_length();
    if (cfg_.trajectory.size() < needed)
      throw std::invalid_argument("Environment: trajectory length " +
                                  std::to_string(cfg_.trajectory.size()) + " < required " +
                                  std::to_string(needed));
  }

  const EnvConfig& config() const { return cfg_; }
  int l_in() const { return cfg_.predictor.l_in; }
  int n_min() const { return n_min_; }
  bool done() const { return done_; }
  std::int64_t cursor() const { return cursor_; }

  std::int64_t min_trajectory_length() const {
    return static_cast<std::int64_t>(l_in()) + 2 * cfg_.warmup_w + cfg_.w_max;
  }

  // Seeds the reconstructed history with l_in true samples (the predictor
  // window is longer than the warmup), then runs two lossless full-bookkeeping
  // warmup segments and scores the second to produce the first reduced state.
  StepOutcome reset(Rng& channel_rng) {
    (void)channel_rng;  // warmup is lossless; the stream is part of the call contract
    recon_.assign(cfg_.trajectory.samples.begin(),
                  cfg_.trajectory.samples.begin() + l_in());
    cursor_ = l_in();
    slots_consumed_ = 0;
    done_ = false;

    double warmup_error = 0.0;
    for (int k = 0; k < 2; ++k) {
      Segment seg{std::vector<double>(cfg_.trajectory.samples.begin() + cursor_,
                                      cfg_.trajectory.samples.begin() + cursor_ + cfg_.warmup_w),
                  cursor_};
      SampledSegment sampled = sample_segment(seg, cfg_.warmup_n);
      Segment recon_seg = reconstruct(sampled);
      if (k == 1) {
        const std::vector<double> predicted =
            predict(cfg_.predictor, history_window(), cfg_.warmup_w);
        warmup_error = mse(std::span<const double>(seg.values), predicted);
      }
      recon_.insert(recon_.end(), recon_seg.values.begin(), recon_seg.values.end());
      cursor_ += cfg_.warmup_w;
    }
    prev_w_ = cfg_.warmup_w;

    StepOutcome out;
    out.reduced_state = warmup_error;
    out.cost = warmup_error;
    out.reward = 0.0;
    out.done = false;
    out.info = StepInfo{sampling_rate(cfg_.warmup_n, cfg_.warmup_w), false, cfg_.warmup_w,
                        cfg_.warmup_n, cursor_, 0, 2 * cfg_.warmup_w};
    if (cfg_.emit_raw_state) out.raw_state = last_history(l_in());
    return out;
  }

  StepOutcome step(const Action& action, Rng& channel_rng) {
    if (done_ || recon_.empty())
      throw std::logic_error("Environment::step: episode done or reset not called");
    validate_action(action);

    const int w = action.w_next;
    const int n = action.n_next;
    Segment seg{std::vector<double>(cfg_.trajectory.samples.begin() + cursor_,
                                    cfg_.trajectory.samples.begin() + cursor_ + w),
                cursor_};
    SampledSegment sampled = sample_segment(seg, n);
    DeliveredSegment delivered = transmit(sampled, cfg_.channel, channel_rng);

    std::vector<double> recon_values;
    if (delivered.outage) {
      recon_values.assign(static_cast<std::size_t>(w), recon_.back());
    } else {
      recon_values = reconstruct(delivered.sampled).values;
    }

    // History ends W_{k+1} slots before the segment's final slot, i.e. at the
    // segment start: the newest segment never feeds its own prediction.
    const std::vector<double> predicted = predict(cfg_.predictor, history_window(), w);
    const double cost = mse(std::span<const double>(seg.values), predicted);
    const double reward = -sampling_rate(n, w);

    recon_.insert(recon_.end(), recon_values.begin(), recon_values.end());
    cursor_ += w;
    slots_consumed_ += w;
    done_ = (cfg_.trajectory.size() - cursor_) < cfg_.w_max;

    StepOutcome out;
    out.reduced_state = cost;
    out.reward = reward;
    out.cost = cost;
    out.done = done_;
    out.info = StepInfo{sampling_rate(n, w), delivered.outage, w,      n,
                        cursor_,             slots_consumed_,  prev_w_ + w};
    prev_w_ = w;
    if (cfg_.emit_raw_state) out.raw_state = last_history(l_in());
    return out;
  }

 private:
  void validate_action(const Action& a) const {
    if (a.w_next < cfg_.w_min() || a.w_next > cfg_.w_max)
      throw std::invalid_argument("Environment: W=" + std::to_string(a.w_next) + " outside [" +
                                  std::to_string(cfg_.w_min()) + ", " + std::to_string(cfg_.w_max) +
                                  "]");
    if (a.n_next < n_min_ || a.n_next > a.w_next)
      throw std::invalid_argument("Environment: n=" + std::to_string(a.n_next) + " outside [" +
                                  std::to_string(n_min_) + ", W=" + std::to_string(a.w_next) + "]");
  }

  std::span<const double> history_window() const {
    return std::span<const double>(recon_.data() + recon_.size() - l_in(),
                                   static_cast<std::size_t>(l_in()));
  }

  std::vector<double> last_history(int count) const {
    return std::vector<double>(recon_.end() - count, recon_.end());
  }

  EnvConfig cfg_;
  int n_min_ = 2;
  std::vector<double> recon_;  // per-slot reconstructed trajectory, slot 0 onward
  std::int64_t cursor_ = 0;
  std::int64_t slots_consumed_ = 0;
  int prev_w_ = 0;
  bool done_ = true;
};

}  // namespace twinsync
