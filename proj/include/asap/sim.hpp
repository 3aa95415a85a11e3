#pragma once

// Synthetic oddball-paradigm EEG: row-column or pseudo-random flashing over a
// character grid, 1/f background noise and a P300-like deflection added after
// every target flash.

#include "asap/error.hpp"
#include "asap/session.hpp"
#include "asap/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace asap {

enum class FlashMode { RowColumn, PseudoRandom };

inline const char* to_string(FlashMode m) { return m == FlashMode::RowColumn ? "row_column" : "pseudo_random"; }

struct SimConfig {
  int L = 36;
  int channels = 8;
  double fs_hz = 256.0;
  int n_repetitions = 10;
  FlashMode flash_mode = FlashMode::RowColumn;
  double soa_ms = 250.0;
  double erp_amplitude = 1.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  double epoch_seconds = 1.0;
  // Silence before the first flash and between characters.
  double pause_seconds = 1.0;
  // Fraction of background noise shared by all channels.
  double common_noise_fraction = 0.3;
};

inline int grid_side(int L) {
  int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(L))));
  while (r * r > L) --r;
  while ((r + 1) * (r + 1) <= L) ++r;
  return r;
}

inline std::int64_t soa_samples(const SimConfig& c) {
  const double s = c.soa_ms * c.fs_hz / 1000.0;
  return static_cast<std::int64_t>(std::lround(s));
}

inline void check_config(const SimConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::BadConfig, what); };
  if (c.L < 2) bad("L must be >= 2");
  if (c.channels < 1) bad("need at least one channel");
  if (!(c.fs_hz > 0.0)) bad("fs must be positive");
  if (c.n_repetitions < 1) bad("need at least one repetition");
  if (!(c.soa_ms > 0.0)) bad("SOA must be positive");
  const double s = c.soa_ms * c.fs_hz / 1000.0;
  if (std::abs(s - std::round(s)) > 1e-9 || std::round(s) < 1) bad("SOA must be a positive whole number of samples");
  if (c.flash_mode == FlashMode::RowColumn) {
    const int side = grid_side(c.L);
    if (side * side != c.L) bad("row_column flashing needs a square L");
  }
  if (!(c.erp_amplitude >= 0.0) || !(c.noise_scale >= 0.0)) bad("amplitudes must be nonnegative");
  if (!(c.epoch_seconds > 0.0) || !(c.pause_seconds >= 0.0)) bad("bad epoch or pause length");
  if (!(c.common_noise_fraction >= 0.0 && c.common_noise_fraction <= 1.0)) bad("common_noise_fraction must lie in [0, 1]");
}

inline int flashes_per_repetition(const SimConfig& c) {
  const int side = grid_side(c.L);
  if (c.flash_mode == FlashMode::RowColumn) return 2 * side;
  return (c.L + side - 1) / side;
}

namespace detail {

// Independent, reproducible stream per (seed, purpose, index).
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose,
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

enum : std::uint32_t { kScheduleStream = 1, kNoiseStream = 2, kTargetStream = 3, kSessionStream = 4 };

}  // namespace detail

// Seed of the index-th session in a batch generated from one base seed.
inline std::uint64_t session_seed(std::uint64_t base_seed, std::uint64_t index) {
  return detail::make_rng(base_seed, detail::kSessionStream, index)();
}

// Flash events for one character selection, onsets relative to the episode
// start. `episode` selects an independent permutation stream.
inline std::vector<FlashEvent> flash_schedule(const SimConfig& c, int target, std::uint64_t episode = 0) {
  check_config(c);
  if (target < 0 || target >= c.L) throw Error(ErrorCode::BadConfig, "target outside [0, L)");
  auto rng = detail::make_rng(c.seed, detail::kScheduleStream, episode);
  const int side = grid_side(c.L);
  const std::int64_t soa = soa_samples(c);

  std::vector<std::vector<int>> rep_sets;
  std::vector<FlashEvent> events;
  for (int r = 0; r < c.n_repetitions; ++r) {
    rep_sets.clear();
    if (c.flash_mode == FlashMode::RowColumn) {
      for (int row = 0; row < side; ++row) {
        std::vector<int> set;
        for (int col = 0; col < side; ++col) set.push_back(row * side + col);
        rep_sets.push_back(std::move(set));
      }
      for (int col = 0; col < side; ++col) {
        std::vector<int> set;
        for (int row = 0; row < side; ++row) set.push_back(row * side + col);
        rep_sets.push_back(std::move(set));
      }
      std::shuffle(rep_sets.begin(), rep_sets.end(), rng);
    } else {
      std::vector<int> perm(static_cast<std::size_t>(c.L));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < perm.size(); i += static_cast<std::size_t>(side)) {
        std::vector<int> set(perm.begin() + static_cast<std::ptrdiff_t>(i),
                             perm.begin() + static_cast<std::ptrdiff_t>(std::min(perm.size(), i + side)));
        std::sort(set.begin(), set.end());
        rep_sets.push_back(std::move(set));
      }
    }
    for (auto& set : rep_sets) {
      FlashEvent ev;
      ev.onset = static_cast<std::int64_t>(events.size()) * soa;
      ev.is_target = std::binary_search(set.begin(), set.end(), target);
      ev.flashed = std::move(set);
      ev.episode_id = static_cast<int>(episode);
      events.push_back(std::move(ev));
    }
  }
  return events;
}

// Gamma-shaped positive deflection peaking at 300 ms (unit peak), one row per
// channel, weighted toward the later (posterior) channels.
inline Matrix p300_template(int channels, double fs_hz, double epoch_seconds) {
  constexpr double kPeak = 0.3;
  constexpr double kShape = 12.0;  // ~200 ms full width at half maximum
  const Eigen::Index n = epoch_samples(epoch_seconds, fs_hz);
  Matrix tpl(channels, n);
  for (int ch = 0; ch < channels; ++ch) {
    const double w = channels == 1 ? 1.0 : 0.4 + 0.6 * ch / static_cast<double>(channels - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) / fs_hz) / kPeak;
      tpl(ch, i) = x <= 0.0 ? 0.0 : w * std::pow(x, kShape) * std::exp(kShape * (1.0 - x));
    }
  }
  return tpl;
}

inline std::vector<std::string> default_channel_names(int channels) {
  if (channels == 8) return {"Fz", "Cz", "Pz", "Oz", "P3", "P4", "PO7", "PO8"};
  if (channels == 16) {
    return {"Fz", "FCz", "Cz", "CPz", "Pz", "Oz", "F3", "F4", "C3", "C4", "CP3", "CP4", "P3", "P4", "PO7", "PO8"};
  }
  std::vector<std::string> out;
  for (int i = 0; i < channels; ++i) out.push_back("Ch" + std::to_string(i + 1));
  return out;
}

// Random target characters, reproducible from the config seed.
inline std::vector<int> random_targets(const SimConfig& c, int count) {
  auto rng = detail::make_rng(c.seed, detail::kTargetStream, 0);
  std::uniform_int_distribution<int> pick(0, c.L - 1);
  std::vector<int> out(static_cast<std::size_t>(std::max(0, count)));
  for (auto& t : out) t = pick(rng);
  return out;
}

namespace detail {

// Unit-variance 1/f noise (three-pole approximation of a pink spectrum).
inline std::vector<double> pink_noise(std::mt19937_64& rng, std::int64_t n) {
  std::normal_distribution<double> white(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(n));
  double b0 = 0, b1 = 0, b2 = 0;
  for (auto& v : out) {
    const double w = white(rng);
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    v = b0 + b1 + b2 + w * 0.1848;
  }
  double mean = 0.0, sq = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(n);
  for (double v : out) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(n));
  if (sd > 0.0) {
    for (auto& v : out) v = (v - mean) / sd;
  }
  return out;
}

}  // namespace detail

inline SessionRecord generate_session(const SimConfig& c, std::span<const int> targets) {
  check_config(c);
  if (targets.empty()) throw Error(ErrorCode::BadConfig, "no target characters");

  const std::int64_t soa = soa_samples(c);
  const auto epoch_len = static_cast<std::int64_t>(epoch_samples(c.epoch_seconds, c.fs_hz));
  const auto pause = static_cast<std::int64_t>(std::lround(c.pause_seconds * c.fs_hz));

  SessionRecord s;
  std::int64_t cursor = pause;
  for (std::size_t e = 0; e < targets.size(); ++e) {
    auto evs = flash_schedule(c, targets[e], e);
    for (auto& ev : evs) {
      ev.onset += cursor;
      s.events.push_back(std::move(ev));
    }
    cursor = s.events.back().onset + soa + pause;
  }
  const std::int64_t total = s.events.back().onset + epoch_len + pause;

  Matrix signal = Matrix::Zero(c.channels, total);
  if (c.noise_scale > 0.0) {
    auto rng = detail::make_rng(c.seed, detail::kNoiseStream, 0);
    const auto common = detail::pink_noise(rng, total);
    const double a = std::sqrt(1.0 - c.common_noise_fraction);
    const double b = std::sqrt(c.common_noise_fraction);
    for (int ch = 0; ch < c.channels; ++ch) {
      const auto own = detail::pink_noise(rng, total);
      for (std::int64_t t = 0; t < total; ++t) {
        const auto i = static_cast<std::size_t>(t);
        signal(ch, t) = c.noise_scale * (a * own[i] + b * common[i]);
      }
    }
  }
  if (c.erp_amplitude > 0.0) {
    const Matrix tpl = c.erp_amplitude * p300_template(c.channels, c.fs_hz, c.epoch_seconds);
    for (const auto& ev : s.events) {
      if (*ev.is_target) signal.middleCols(ev.onset, tpl.cols()) += tpl;
    }
  }

  s.recording = RawRecording{std::move(signal), c.fs_hz};
  s.channel_names = default_channel_names(c.channels);
  s.L = c.L;
  const int side = grid_side(c.L);
  s.grid_rows = side;
  s.grid_cols = (c.L + side - 1) / side;
  s.soa_ms = c.soa_ms;
  s.epoch_seconds = c.epoch_seconds;
  s.dataset_id = "sim";
  s.flashes_per_repetition = flashes_per_repetition(c);
  return s;
}

}  // namespace asap
