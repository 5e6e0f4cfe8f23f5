#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twinsync {

// Contiguous block of trajectory slots treated as one sampling/prediction
// unit. values[i] is the angle at slot start_slot + i.
struct Segment {
  std::vector<double> values;
  std::int64_t start_slot = 0;

  int length() const { return static_cast<int>(values.size()); }
};

// Decimated segment. Local slots are 1-based and strictly increasing; the
// first intended slot is always 1. pairs may be shorter than n after losses.
struct SampledSegment {
  std::vector<std::pair<int, double>> pairs;  // (local slot in [1, w], value)
  int w = 0;                                  // source segment length
  int n = 0;                                  // intended sample count
};

// Fewer than two survivors: linear reconstruction is impossible and the
// caller decides the fallback.
struct OutageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Decimation at local slots floor(w/n)*(i-1)+1 for i = 1..n.
inline SampledSegment sample_segment(const Segment& seg, int n) {
  const int w = seg.length();
  if (n < 2 || n > w)
    throw std::invalid_argument("sample_segment: n=" + std::to_string(n) +
                                " outside [2, W=" + std::to_string(w) + "]");
  SampledSegment out;
  out.w = w;
  out.n = n;
  out.pairs.reserve(static_cast<std::size_t>(n));
  const int step = w / n;
  for (int i = 1; i <= n; ++i) {
    const int slot = step * (i - 1) + 1;
    out.pairs.emplace_back(slot, seg.values[static_cast<std::size_t>(slot - 1)]);
  }
  return out;
}

// Packets per slot for one segment: n/W.
inline double sampling_rate(int n, int w) {
  if (w == 0) throw std::invalid_argument("sampling_rate: W = 0");
  if (n < 1 || n > w)
    throw std::invalid_argument("sampling_rate: n=" + std::to_string(n) + " outside [1, W=" +
                                std::to_string(w) + "]");
  return static_cast<double>(n) / static_cast<double>(w);
}

// Piecewise-linear reconstruction over all W local slots. Outside the span of
// received samples the nearest interval's line is extended, which keeps
// reconstruct(sample_segment(seg, n)) exact for affine segments at any n.
inline Segment reconstruct(const SampledSegment& sampled) {
  const auto& pairs = sampled.pairs;
  if (pairs.size() < 2)
    throw OutageError("reconstruct: fewer than 2 surviving samples (outage)");
  if (sampled.w < 2) throw std::invalid_argument("reconstruct: W < 2");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first < 1 || pairs[i].first > sampled.w)
      throw std::invalid_argument("reconstruct: local slot outside [1, W]");
    if (i > 0 && pairs[i].first <= pairs[i - 1].first)
      throw std::invalid_argument("reconstruct: local slots not strictly increasing");
  }

  Segment out;
  out.values.resize(static_cast<std::size_t>(sampled.w));
  std::size_t seg_idx = 0;  // interval [pairs[seg_idx], pairs[seg_idx+1]]
  for (int slot = 1; slot <= sampled.w; ++slot) {
    while (seg_idx + 2 < pairs.size() && slot > pairs[seg_idx + 1].first) ++seg_idx;
    const auto& [s0, v0] = pairs[seg_idx];
    const auto& [s1, v1] = pairs[seg_idx + 1];
    const double t = static_cast<double>(slot - s0) / static_cast<double>(s1 - s0);
    // (1-t)*v0 + t*v1 hits received values exactly at t = 0 and t = 1.
    out.values[static_cast<std::size_t>(slot - 1)] = (1.0 - t) * v0 + t * v1;
  }
  return out;
}

inline double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("mse: length mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  if (a.empty()) throw std::invalid_argument("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

inline double mse(const Segment& a, const Segment& b) {
  return mse(std::span<const double>(a.values), std::span<const double>(b.values));
}

}  // namespace twinsync
