#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinsync/io.hpp"
#include "twinsync/rng.hpp"

namespace twinsync {

// Fixed-rate (1 kHz) scalar joint-angle time series in degrees. Slot t maps
// to samples[t - origin_slot]; out-of-range access throws instead of
// defaulting.
struct Trajectory {
  std::vector<double> samples;
  double slot_duration_ms = 1.0;
  std::int64_t origin_slot = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(samples.size()); }
  std::int64_t end_slot() const { return origin_slot + size(); }

  double at(std::int64_t slot) const {
    const std::int64_t i = slot - origin_slot;
    if (i < 0 || i >= size())
      throw std::out_of_range("Trajectory: slot " + std::to_string(slot) + " outside [" +
                              std::to_string(origin_slot) + ", " + std::to_string(end_slot()) +
                              ")");
    return samples[static_cast<std::size_t>(i)];
  }

  std::span<const double> slice(std::int64_t start_slot, std::int64_t length) const {
    const std::int64_t i = start_slot - origin_slot;
    if (length < 0 || i < 0 || i + length > size())
      throw std::out_of_range("Trajectory: slice [" + std::to_string(start_slot) + ", " +
                              std::to_string(start_slot + length) + ") outside range");
    return std::span<const double>(samples.data() + i, static_cast<std::size_t>(length));
  }

  void validate() const {
    if (samples.empty()) throw std::invalid_argument("Trajectory: samples empty");
    if (!(slot_duration_ms > 0)) throw std::invalid_argument("Trajectory: slot_duration <= 0");
  }
};

struct SineComponent {
  double amplitude_deg = 0.0;
  double frequency_hz = 0.0;
  double phase_rad = 0.0;
};

struct SynthSpec {
  std::vector<SineComponent> components;
  double noise_std_deg = 0.0;
  std::int64_t duration_slots = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (duration_slots < 1) throw std::invalid_argument("SynthSpec: duration_slots < 1");
    if (noise_std_deg < 0) throw std::invalid_argument("SynthSpec: noise_std < 0");
    for (const auto& c : components)
      if (c.frequency_hz >= 500.0)
        throw std::invalid_argument("SynthSpec: frequency " + std::to_string(c.frequency_hz) +
                                    " Hz at or above Nyquist (500 Hz at 1 kHz sampling)");
  }
};

// Smooth drawing-like default: three sinusoids plus a little sensor noise,
// 20 s at 1 kHz.
inline SynthSpec default_synth_spec(std::uint64_t seed) {
  SynthSpec spec;
  spec.components = {{1.0, 0.7, 0.0}, {0.3, 2.3, 0.0}, {0.1, 5.1, 0.0}};
  spec.noise_std_deg = 0.005;
  spec.duration_slots = 20000;
  spec.seed = seed;
  return spec;
}

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  // Trim whitespace/CR; accept the usual decimal and exponent forms.
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  if (b == e) return false;
  const char* first = s.data() + b;
  const char* last = s.data() + e;
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace detail

// One angle per row, optional single header line (any non-numeric first
// line). Row i becomes slot i.
inline Trajectory load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_trace: cannot open " + path);
  Trajectory traj;
  traj.origin_slot = 0;
  traj.slot_duration_ms = 1.0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    double v = 0.0;
    if (detail::parse_double(line, v)) {
      traj.samples.push_back(v);
    } else if (line_no == 1) {
      continue;  // header
    } else {
      // Trailing blank line is fine; anything else is a parse error.
      bool blank = true;
      for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
      if (blank && in.peek() == std::char_traits<char>::eof()) continue;
      throw std::runtime_error("load_trace: " + path + ": non-numeric value at line " +
                               std::to_string(line_no));
    }
  }
  if (traj.samples.empty()) throw std::runtime_error("load_trace: " + path + " has no samples");
  return traj;
}

// Writes one angle per line with an optional header/comment line. Values are
// emitted in shortest round-trip form, so load_trace(save_trace(t)) == t
// bit for bit.
inline void save_trace(const Trajectory& traj, const std::string& path,
                       const std::string& header = "") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_trace: cannot open " + path);
  if (!header.empty()) out << header << "\n";
  for (double v : traj.samples) out << format_double(v) << "\n";
}

inline Trajectory synthesize_trace(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Trajectory traj;
  traj.origin_slot = 0;
  traj.slot_duration_ms = 1.0;
  traj.samples.resize(static_cast<std::size_t>(spec.duration_slots));
  for (std::int64_t t = 0; t < spec.duration_slots; ++t) {
    double v = 0.0;
    for (const auto& c : spec.components)
      v += c.amplitude_deg *
           std::sin(2.0 * M_PI * c.frequency_hz * static_cast<double>(t) * 0.001 + c.phase_rad);
    if (spec.noise_std_deg > 0) v += rng.gaussian(0.0, spec.noise_std_deg);
    traj.samples[static_cast<std::size_t>(t)] = v;
  }
  return traj;
}

// Smallest lag whose normalized autocorrelation drops below the threshold.
// Seeds the predictor input length: history older than this carries little
// information about the future.
inline std::int64_t estimate_decorrelation_time(const Trajectory& traj, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("estimate_decorrelation_time: threshold must be in (0,1)");
  const std::int64_t n = traj.size();
  if (n < 2) throw std::invalid_argument("estimate_decorrelation_time: need >= 2 samples");
  double mean = 0.0;
  for (double v : traj.samples) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : traj.samples) denom += (v - mean) * (v - mean);
  if (denom <= 0.0)
    throw std::invalid_argument("estimate_decorrelation_time: zero-variance trajectory");
  for (std::int64_t lag = 1; lag < n; ++lag) {
    double acc = 0.0;
    for (std::int64_t t = 0; t + lag < n; ++t)
      acc += (traj.samples[static_cast<std::size_t>(t)] - mean) *
             (traj.samples[static_cast<std::size_t>(t + lag)] - mean);
    if (acc / denom < threshold) return lag;
  }
  return n - 1;  // never decorrelates within the trace; cap at the longest lag
}

}  // namespace twinsync
