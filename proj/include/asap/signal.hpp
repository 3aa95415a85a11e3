#pragma once

// Continuous recording -> band-pass filtered -> epochs -> prototype-extended
// covariance features.

#include "asap/error.hpp"
#include "asap/spd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace asap {

enum class ErpClass { Target, NonTarget };

inline const char* to_string(ErpClass k) { return k == ErpClass::Target ? "T" : "NT"; }

// C x T samples at a fixed sampling rate.
struct RawRecording {
  Matrix samples;
  double fs_hz = 0.0;

  Eigen::Index channels() const noexcept { return samples.rows(); }
  Eigen::Index length() const noexcept { return samples.cols(); }
};

inline void check_recording(const RawRecording& raw) {
  if (raw.channels() <= 0 || raw.length() <= 0) throw Error(ErrorCode::BadArgument, "empty recording");
  if (!(raw.fs_hz > 0.0)) throw Error(ErrorCode::BadArgument, "sampling rate must be positive");
  if (!raw.samples.allFinite()) throw Error(ErrorCode::NonFinite, "recording has non-finite samples");
}

struct FlashEvent {
  std::int64_t onset = 0;
  std::vector<int> flashed;  // sorted, unique character indices
  std::optional<bool> is_target;
  int episode_id = 0;

  bool contains(int character) const {
    return std::binary_search(flashed.begin(), flashed.end(), character);
  }
};

struct Trial {
  Matrix data;  // C x N
  FlashEvent event;
  std::optional<ErpClass> label;
};

struct Prototype {
  Matrix P;  // C x N
};

// ---------------------------------------------------------------------------
// Band-pass filtering

// One second-order section in transposed direct form II, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

struct BandpassOptions {
  double low_hz = 1.0;
  double high_hz = 20.0;
  // Butterworth order of each edge (high-pass and low-pass); must be even.
  int order = 4;
};

namespace detail {

inline std::vector<Biquad> butterworth_sections(double cutoff_hz, double fs_hz, int order, bool highpass) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / fs_hz);
  const double k2 = k * k;
  std::vector<Biquad> out;
  for (int i = 0; i < order / 2; ++i) {
    const double theta = std::numbers::pi * (2.0 * i + 1.0) / (2.0 * order);
    const double q = 1.0 / (2.0 * std::cos(theta));
    const double norm = 1.0 / (1.0 + k / q + k2);
    Biquad s{};
    if (highpass) {
      s.b0 = norm;
      s.b1 = -2.0 * norm;
    } else {
      s.b0 = k2 * norm;
      s.b1 = 2.0 * k2 * norm;
    }
    s.b2 = s.b0;
    s.a1 = 2.0 * (k2 - 1.0) * norm;
    s.a2 = (1.0 - k / q + k2) * norm;
    out.push_back(s);
  }
  return out;
}

// Filters x in place through the cascade, with every section's state set to
// the steady-state response to a constant input equal to x[0].
inline void sos_filter_steady(std::span<const Biquad> sos, std::vector<double>& x) {
  if (x.empty()) return;
  double level = x.front();
  for (const auto& s : sos) {
    const double y0 = s.dc_gain() * level;
    double z1 = y0 - s.b0 * level;
    double z2 = s.b2 * level - s.a2 * y0;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level = y0;
  }
}

// Forward-backward filtering with odd extension at both ends.
inline std::vector<double> filtfilt(std::span<const Biquad> sos, std::span<const double> x) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  std::ptrdiff_t pad = 3 * static_cast<std::ptrdiff_t>(2 * sos.size() + 1);
  pad = std::min(pad, n - 1);
  std::vector<double> ext;
  ext.reserve(static_cast<std::size_t>(n + 2 * pad));
  for (std::ptrdiff_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::ptrdiff_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  sos_filter_steady(sos, ext);
  std::reverse(ext.begin(), ext.end());
  sos_filter_steady(sos, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + pad, ext.begin() + pad + n};
}

}  // namespace detail

// Zero-phase Butterworth band-pass (high-pass cascade followed by low-pass
// cascade, run forward then backward). Output has the input's shape.
inline RawRecording bandpass_filter(const RawRecording& raw, const BandpassOptions& opt = {}) {
  check_recording(raw);
  if (!(opt.low_hz > 0.0) || !(opt.low_hz < opt.high_hz) || !(opt.high_hz < raw.fs_hz / 2.0)) {
    throw Error(ErrorCode::InvalidBand, "need 0 < low < high < fs/2, got [" + std::to_string(opt.low_hz) +
                                            ", " + std::to_string(opt.high_hz) + "] at fs " +
                                            std::to_string(raw.fs_hz));
  }
  if (opt.order < 2 || opt.order % 2 != 0) throw Error(ErrorCode::InvalidBand, "filter order must be even and >= 2");

  std::vector<Biquad> sos = detail::butterworth_sections(opt.low_hz, raw.fs_hz, opt.order, true);
  const auto lp = detail::butterworth_sections(opt.high_hz, raw.fs_hz, opt.order, false);
  sos.insert(sos.end(), lp.begin(), lp.end());

  RawRecording out{Matrix(raw.channels(), raw.length()), raw.fs_hz};
  std::vector<double> row(static_cast<std::size_t>(raw.length()));
  for (Eigen::Index c = 0; c < raw.channels(); ++c) {
    for (Eigen::Index t = 0; t < raw.length(); ++t) row[static_cast<std::size_t>(t)] = raw.samples(c, t);
    const auto filtered = detail::filtfilt(sos, row);
    for (Eigen::Index t = 0; t < raw.length(); ++t) out.samples(c, t) = filtered[static_cast<std::size_t>(t)];
  }
  return out;
}

inline RawRecording bandpass_filter(const RawRecording& raw, double low_hz, double high_hz) {
  return bandpass_filter(raw, BandpassOptions{low_hz, high_hz, 4});
}

// ---------------------------------------------------------------------------
// Epoching

inline Eigen::Index epoch_samples(double epoch_seconds, double fs_hz) {
  return static_cast<Eigen::Index>(std::lround(epoch_seconds * fs_hz));
}

inline std::vector<Trial> epoch(const RawRecording& raw, std::span<const FlashEvent> events,
                                double epoch_seconds = 1.0) {
  const Eigen::Index n = epoch_samples(epoch_seconds, raw.fs_hz);
  if (n < 1) throw Error(ErrorCode::BadArgument, "epoch shorter than one sample");
  std::vector<Trial> trials;
  trials.reserve(events.size());
  for (const auto& ev : events) {
    if (ev.onset < 0 || ev.onset + n > raw.length()) {
      throw Error(ErrorCode::EventOutOfRange, "event at sample " + std::to_string(ev.onset) +
                                                  " needs " + std::to_string(n) + " samples, recording has " +
                                                  std::to_string(raw.length()));
    }
    Trial t;
    t.data = raw.samples.middleCols(ev.onset, n);
    t.event = ev;
    if (ev.is_target) t.label = *ev.is_target ? ErpClass::Target : ErpClass::NonTarget;
    trials.push_back(std::move(t));
  }
  return trials;
}

// ---------------------------------------------------------------------------
// Prototype and extended covariance

// Grand average of target responses.
inline Prototype estimate_prototype(std::span<const Trial> target_trials) {
  if (target_trials.empty()) throw Error(ErrorCode::EmptyInput, "no target trials for prototype");
  const auto& first = target_trials.front().data;
  Matrix sum = Matrix::Zero(first.rows(), first.cols());
  for (const auto& t : target_trials) {
    if (t.label != ErpClass::Target) throw Error(ErrorCode::MixedLabels, "prototype input contains a non-target trial");
    if (t.data.rows() != first.rows() || t.data.cols() != first.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "trials differ in shape");
    }
    sum += t.data;
  }
  return Prototype{sum / static_cast<double>(target_trials.size())};
}

inline constexpr double kDefaultShrinkage = 1e-2;

// Sigma = [P; X][P; X]^T / (N-1), shrunk toward (trace/2C) I.
inline SpdMatrix extended_covariance(const Trial& trial, const Prototype& proto,
                                     double shrinkage = kDefaultShrinkage) {
  const Matrix& x = trial.data;
  const Matrix& p = proto.P;
  if (x.rows() != p.rows() || x.cols() != p.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "trial and prototype shapes differ");
  }
  if (x.cols() < 2) throw Error(ErrorCode::BadArgument, "need at least 2 samples per epoch");
  if (!(shrinkage >= 0.0 && shrinkage < 1.0)) throw Error(ErrorCode::BadArgument, "shrinkage must lie in [0, 1)");

  const Eigen::Index c = x.rows();
  Matrix stacked(2 * c, x.cols());
  stacked.topRows(c) = p;
  stacked.bottomRows(c) = x;
  Matrix s = stacked * stacked.transpose() / static_cast<double>(x.cols() - 1);
  s = 0.5 * (s + s.transpose());
  if (shrinkage > 0.0) {
    const double mu = s.trace() / static_cast<double>(2 * c);
    s = (1.0 - shrinkage) * s;
    s.diagonal().array() += shrinkage * mu;
  }
  return validate_spd(s);
}

}  // namespace asap
