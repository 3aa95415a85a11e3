#pragma once

// The neutral on-disk session format shared by the simulator, the dataset
// converter and the evaluation harness. One directory per session:
//
//   session.json  metadata (counts, layout, timing)
//   signal.f32le  little-endian float32, channel-major, n_channels * n_samples values
//   events.csv    onset_sample,episode_id,flashed_characters,is_target

#include "asap/error.hpp"
#include "asap/io.hpp"
#include "asap/signal.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace asap {

struct SessionRecord {
  RawRecording recording;
  std::vector<FlashEvent> events;
  std::vector<std::string> channel_names;
  int L = 36;
  int grid_rows = 6;
  int grid_cols = 6;
  double soa_ms = 250.0;
  double epoch_seconds = 1.0;
  std::string dataset_id = "sim";
  std::string subject_id = "S01";
  std::string session_id = "0";
  // Not part of the minimal schema; inferred from the flash sets when absent.
  std::optional<int> flashes_per_repetition;
};

// A contiguous run of events belonging to one character selection.
struct Episode {
  int id = 0;
  std::size_t begin = 0;  // index into SessionRecord::events
  std::size_t end = 0;
  std::optional<int> target;

  std::size_t size() const noexcept { return end - begin; }
};

// Character consistent with every labelled flash of the range, if unique.
inline std::optional<int> infer_target(std::span<const FlashEvent> events, int L) {
  std::vector<char> candidate(static_cast<std::size_t>(L), 1);
  bool labelled = false;
  for (const auto& ev : events) {
    if (!ev.is_target) continue;
    labelled = true;
    std::vector<char> in(static_cast<std::size_t>(L), 0);
    for (int l : ev.flashed) {
      if (l >= 0 && l < L) in[static_cast<std::size_t>(l)] = 1;
    }
    for (int l = 0; l < L; ++l) {
      const auto i = static_cast<std::size_t>(l);
      if (*ev.is_target ? !in[i] : in[i]) candidate[i] = 0;
    }
  }
  if (!labelled) return std::nullopt;
  std::optional<int> found;
  for (int l = 0; l < L; ++l) {
    if (!candidate[static_cast<std::size_t>(l)]) continue;
    if (found) return std::nullopt;
    found = l;
  }
  return found;
}

inline std::vector<Episode> episodes(const SessionRecord& s) {
  std::vector<Episode> out;
  std::set<int> seen;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const int id = s.events[i].episode_id;
    if (out.empty() || out.back().id != id) {
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::FormatError, "episode " + std::to_string(id) + " is not contiguous");
      }
      out.push_back(Episode{id, i, i, std::nullopt});
    }
    out.back().end = i + 1;
  }
  for (auto& ep : out) {
    ep.target = infer_target(std::span(s.events).subspan(ep.begin, ep.size()), s.L);
  }
  return out;
}

// Number of flashes forming one repetition. Row-column sessions use
// rows + cols; otherwise the shortest prefix of the first episode in which
// every character is flashed exactly once.
inline int flashes_per_repetition(const SessionRecord& s) {
  if (s.flashes_per_repetition) return *s.flashes_per_repetition;
  if (s.events.empty()) throw Error(ErrorCode::FormatError, "session has no events");

  const bool grid = s.grid_rows > 0 && s.grid_cols > 0 && s.grid_rows * s.grid_cols == s.L;
  if (grid) {
    auto is_line = [&](const FlashEvent& ev) {
      if (static_cast<int>(ev.flashed.size()) == s.grid_cols) {
        const int row = ev.flashed.front() / s.grid_cols;
        bool ok = true;
        for (int k = 0; k < s.grid_cols; ++k) ok = ok && ev.flashed[static_cast<std::size_t>(k)] == row * s.grid_cols + k;
        if (ok) return true;
      }
      if (static_cast<int>(ev.flashed.size()) == s.grid_rows) {
        const int col = ev.flashed.front() % s.grid_cols;
        bool ok = true;
        for (int k = 0; k < s.grid_rows; ++k) ok = ok && ev.flashed[static_cast<std::size_t>(k)] == k * s.grid_cols + col;
        if (ok) return true;
      }
      return false;
    };
    if (std::all_of(s.events.begin(), s.events.end(), is_line)) return s.grid_rows + s.grid_cols;
  }

  std::vector<int> count(static_cast<std::size_t>(s.L), 0);
  int covered = 0;
  const int first_episode = s.events.front().episode_id;
  for (std::size_t i = 0; i < s.events.size() && s.events[i].episode_id == first_episode; ++i) {
    for (int l : s.events[i].flashed) {
      if (count[static_cast<std::size_t>(l)]++ == 0) ++covered;
    }
    if (covered == s.L) {
      if (std::all_of(count.begin(), count.end(), [](int c) { return c == 1; })) return static_cast<int>(i + 1);
      break;
    }
  }
  throw Error(ErrorCode::FormatError, "cannot infer flashes per repetition; set flashes_per_repetition in session.json");
}

inline void validate_session(const SessionRecord& s) {
  check_recording(s.recording);
  if (s.L < 2) throw Error(ErrorCode::FormatError, "L must be >= 2");
  if (static_cast<Eigen::Index>(s.channel_names.size()) != s.recording.channels()) {
    throw Error(ErrorCode::FormatError, "channel_names length does not match n_channels");
  }
  const Eigen::Index n = epoch_samples(s.epoch_seconds, s.recording.fs_hz);
  std::int64_t last = -1;
  for (const auto& ev : s.events) {
    if (ev.onset < last) throw Error(ErrorCode::FormatError, "events are not in onset order");
    last = ev.onset;
    if (ev.onset < 0 || ev.onset + n > s.recording.length()) {
      throw Error(ErrorCode::EventOutOfRange, "event at sample " + std::to_string(ev.onset) + " exceeds recording");
    }
    if (ev.flashed.empty()) throw Error(ErrorCode::FormatError, "event with empty flash set");
    if (ev.flashed.front() < 0 || ev.flashed.back() >= s.L) {
      throw Error(ErrorCode::FormatError, "flashed character outside [0, L)");
    }
  }
  (void)episodes(s);
}

namespace detail {

inline std::string events_to_csv(std::span<const FlashEvent> events) {
  std::string out = "onset_sample,episode_id,flashed_characters,is_target\n";
  for (const auto& ev : events) {
    out += std::to_string(ev.onset);
    out += ',';
    out += std::to_string(ev.episode_id);
    out += ',';
    for (std::size_t i = 0; i < ev.flashed.size(); ++i) {
      if (i) out += '|';
      out += std::to_string(ev.flashed[i]);
    }
    out += ',';
    out += ev.is_target ? (*ev.is_target ? "1" : "0") : "NA";
    out += '\n';
  }
  return out;
}

inline std::vector<FlashEvent> events_from_csv(const std::string& text, const std::string& name) {
  std::vector<FlashEvent> events;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || io::trim_cr(line) != "onset_sample,episode_id,flashed_characters,is_target") {
    throw Error(ErrorCode::FormatError, name + ": unexpected header");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = io::trim_cr(line);
    if (view.empty()) continue;
    const auto cols = io::split(view, ',');
    const std::string ctx = name + ":" + std::to_string(lineno);
    if (cols.size() != 4) throw Error(ErrorCode::FormatError, ctx + ": expected 4 columns");
    FlashEvent ev;
    ev.onset = io::parse_int(cols[0], ctx);
    ev.episode_id = static_cast<int>(io::parse_int(cols[1], ctx));
    for (const auto& f : io::split(cols[2], '|')) ev.flashed.push_back(static_cast<int>(io::parse_int(f, ctx)));
    std::sort(ev.flashed.begin(), ev.flashed.end());
    ev.flashed.erase(std::unique(ev.flashed.begin(), ev.flashed.end()), ev.flashed.end());
    if (cols[3] == "1") ev.is_target = true;
    else if (cols[3] == "0") ev.is_target = false;
    else if (cols[3] != "NA") throw Error(ErrorCode::FormatError, ctx + ": is_target must be 0, 1 or NA");
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace detail

inline nlohmann::json session_metadata(const SessionRecord& s) {
  nlohmann::json j = {
      {"dataset_id", s.dataset_id},
      {"subject_id", s.subject_id},
      {"session_id", s.session_id},
      {"fs_hz", s.recording.fs_hz},
      {"n_channels", s.recording.channels()},
      {"channel_names", s.channel_names},
      {"L", s.L},
      {"grid_rows", s.grid_rows},
      {"grid_cols", s.grid_cols},
      {"soa_ms", s.soa_ms},
      {"n_samples", s.recording.length()},
      {"epoch_seconds", s.epoch_seconds},
  };
  if (s.flashes_per_repetition) j["flashes_per_repetition"] = *s.flashes_per_repetition;
  return j;
}

inline void write_session(const SessionRecord& s, const std::filesystem::path& dir) {
  validate_session(s);
  std::string signal;
  signal.reserve(static_cast<std::size_t>(4 * s.recording.samples.size()));
  for (Eigen::Index c = 0; c < s.recording.channels(); ++c) {
    for (Eigen::Index t = 0; t < s.recording.length(); ++t) {
      io::append_le(signal, static_cast<float>(s.recording.samples(c, t)));
    }
  }
  io::write_atomic(dir / "signal.f32le", signal);
  io::write_atomic(dir / "events.csv", detail::events_to_csv(s.events));
  io::write_atomic(dir / "session.json", session_metadata(s).dump(2) + "\n");
}

inline SessionRecord read_session(const std::filesystem::path& dir) {
  const auto meta_path = dir / "session.json";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, meta_path.string() + ": " + e.what());
  }

  SessionRecord s;
  Eigen::Index channels = 0, samples = 0;
  try {
    s.dataset_id = j.at("dataset_id").get<std::string>();
    s.subject_id = j.at("subject_id").get<std::string>();
    s.session_id = j.at("session_id").get<std::string>();
    s.recording.fs_hz = j.at("fs_hz").get<double>();
    channels = j.at("n_channels").get<Eigen::Index>();
    s.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    s.L = j.at("L").get<int>();
    s.grid_rows = j.at("grid_rows").get<int>();
    s.grid_cols = j.at("grid_cols").get<int>();
    s.soa_ms = j.at("soa_ms").get<double>();
    samples = j.at("n_samples").get<Eigen::Index>();
    s.epoch_seconds = j.at("epoch_seconds").get<double>();
    if (j.contains("flashes_per_repetition")) s.flashes_per_repetition = j.at("flashes_per_repetition").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, meta_path.string() + ": " + e.what());
  }
  if (channels <= 0 || samples <= 0) throw Error(ErrorCode::FormatError, meta_path.string() + ": empty signal");

  const auto sig_path = dir / "signal.f32le";
  const std::string raw = io::read_file(sig_path);
  const auto expected = static_cast<std::size_t>(4 * channels * samples);
  if (raw.size() != expected) {
    throw Error(ErrorCode::FormatError, sig_path.string() + ": expected " + std::to_string(expected) +
                                            " bytes, found " + std::to_string(raw.size()));
  }
  s.recording.samples.resize(channels, samples);
  const char* p = raw.data();
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (Eigen::Index t = 0; t < samples; ++t, p += 4) s.recording.samples(c, t) = io::read_le<float>(p);
  }

  const auto ev_path = dir / "events.csv";
  s.events = detail::events_from_csv(io::read_file(ev_path), ev_path.string());
  validate_session(s);
  return s;
}

}  // namespace asap
