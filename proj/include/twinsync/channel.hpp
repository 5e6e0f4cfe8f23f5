#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "twinsync/dsp.hpp"
#include "twinsync/rng.hpp"

namespace twinsync {

// Link abstraction: i.i.d. per-packet Bernoulli loss plus the delay-bound
// timing contract (a segment's packets are credited by the end of the next
// segment; per-packet jitter is not modeled).
struct ChannelConfig {
  int d_max = 10;       // delay bound, slots
  int d_forward = 10;   // forward-link E2E delay, slots
  int d_feedback = 10;  // feedback-link E2E delay, slots
  double p_loss = 0.0;
  double outage_target = 1e-5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(p_loss >= 0.0 && p_loss < 1.0))
      throw std::invalid_argument("ChannelConfig: p_loss must be in [0, 1)");
    if (!(outage_target > 0.0 && outage_target < 1.0))
      throw std::invalid_argument("ChannelConfig: outage_target must be in (0, 1)");
    if (d_max < 1) throw std::invalid_argument("ChannelConfig: d_max < 1");
    if (d_forward > d_max || d_feedback > d_max)
      throw std::invalid_argument(
          "ChannelConfig: link delays beyond d_max would always be dropped");
    if (d_forward < 0 || d_feedback < 0)
      throw std::invalid_argument("ChannelConfig: negative link delay");
  }
};

struct DeliveredSegment {
  SampledSegment sampled;  // survivors only; w and n preserved from the input
  int lost_count = 0;
  bool outage = false;  // fewer than 2 survivors
};

// Smallest N >= 2 with p^N + N*p^(N-1)*(1-p) <= outage_target: the chance of
// zero or one survivor must not exceed the target. Floor of 2 because linear
// reconstruction needs two points.
inline int min_samples(double p_loss, double outage_target) {
  if (!(p_loss >= 0.0 && p_loss < 1.0))
    throw std::invalid_argument("min_samples: p_loss must be in [0, 1)");
  if (!(outage_target > 0.0 && outage_target < 1.0))
    throw std::invalid_argument("min_samples: outage_target must be in (0, 1)");
  for (int n = 2;; ++n) {
    const double p_zero_or_one =
        std::pow(p_loss, n) + static_cast<double>(n) * std::pow(p_loss, n - 1) * (1.0 - p_loss);
    if (p_zero_or_one <= outage_target) return n;
  }
}

// Bounded variant for per-segment floors: n cannot exceed the segment length,
// so when even `cap` samples miss the outage target (p_loss near 1) the floor
// clamps to cap and maximum sampling is the best the link can do.
inline int min_samples_capped(double p_loss, double outage_target, int cap) {
  if (cap < 2) throw std::invalid_argument("min_samples_capped: cap < 2");
  for (int n = 2; n <= cap; ++n) {
    const double p_zero_or_one =
        std::pow(p_loss, n) + static_cast<double>(n) * std::pow(p_loss, n - 1) * (1.0 - p_loss);
    if (p_zero_or_one <= outage_target) return n;
  }
  return cap;
}

// Applies per-packet loss; survivors keep order and values. Delay is handled
// by the environment's timing contract, not here.
inline DeliveredSegment transmit(const SampledSegment& sampled, const ChannelConfig& cfg,
                                 Rng& rng) {
  cfg.validate();
  DeliveredSegment out;
  out.sampled.w = sampled.w;
  out.sampled.n = sampled.n;
  out.sampled.pairs.reserve(sampled.pairs.size());
  for (const auto& pair : sampled.pairs) {
    if (rng.uniform() < cfg.p_loss) {
      ++out.lost_count;
    } else {
      out.sampled.pairs.push_back(pair);
    }
  }
  out.outage = out.sampled.pairs.size() < 2;
  return out;
}

}  // namespace twinsync
