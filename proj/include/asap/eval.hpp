#pragma once

// Within-session evaluation: calibrate on the first episodes, replay the rest
// flash by flash through ASAP and MDM+OM, score accuracy and ITR per repetition.

#include "asap/accumulator.hpp"
#include "asap/erp.hpp"
#include "asap/error.hpp"
#include "asap/io.hpp"
#include "asap/session.hpp"
#include "asap/signal.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace asap {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  BandpassOptions bandpass{};
  double shrinkage = kDefaultShrinkage;
  KarcherOptions karcher{};
  bool equal_dispersion = true;
  std::optional<std::vector<double>> priors;
  int n_train_episodes = 6;
  // Added to each selection's flashing time when computing ITR.
  double overhead_seconds = 0.0;
  bool record_traces = false;
};

inline nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j = {
      {"bandpass_low_hz", c.bandpass.low_hz},
      {"bandpass_high_hz", c.bandpass.high_hz},
      {"bandpass_order", c.bandpass.order},
      {"shrinkage", c.shrinkage},
      {"karcher_tol", c.karcher.tol},
      {"karcher_max_iter", c.karcher.max_iter},
      {"equal_dispersion", c.equal_dispersion},
      {"n_train_episodes", c.n_train_episodes},
      {"overhead_seconds", c.overhead_seconds},
  };
  j["priors"] = c.priors ? nlohmann::json(*c.priors) : nlohmann::json(nullptr);
  return j;
}

// Bits per minute for accuracy p over L choices, one selection every
// `seconds_per_selection` seconds. Chance level and below give 0.
inline double itr(double p, int L, double seconds_per_selection) {
  if (!(p >= 0.0 && p <= 1.0) || L < 2 || !(seconds_per_selection > 0.0)) {
    throw Error(ErrorCode::BadArgument, "itr needs p in [0,1], L >= 2, positive time");
  }
  auto xlog2 = [](double x) { return x > 0.0 ? x * std::log2(x) : 0.0; };
  double bits = std::log2(static_cast<double>(L)) + xlog2(p);
  if (p < 1.0) bits += (1.0 - p) * std::log2((1.0 - p) / (L - 1));
  // Exactly zero at chance even after rounding.
  if (p <= 1.0 / L) bits = 0.0;
  return std::max(0.0, 60.0 * bits / seconds_per_selection);
}

inline double seconds_per_selection(int repetitions, int flashes_per_rep, double soa_ms, double overhead_seconds) {
  return repetitions * flashes_per_rep * soa_ms / 1000.0 + overhead_seconds;
}

inline constexpr const char* kMethodAsap = "ASAP";
inline constexpr const char* kMethodOm = "MDM+OM";

struct ReportRow {
  std::string method;
  std::string dataset;
  std::string subject;
  std::string session;
  int repetition = 0;
  double accuracy = 0.0;
  double itr_bits_per_min = 0.0;
  int n_episodes = 0;
  // Summary-only fields (not in the CSV).
  double ci95_half_width = 0.0;
  double mean_target_probability = 0.0;
  double mean_nontarget_probability = 0.0;
};

// Decision snapshot of one episode after one repetition.
struct EpisodeOutcome {
  std::string method;
  int episode_id = 0;
  int target = 0;
  int repetition = 0;
  int predicted = 0;
  double target_probability = 0.0;
  double mean_nontarget_probability = 0.0;
};

struct TraceRow {
  int episode_id = 0;
  int t = 0;
  int character = 0;
  double probability = 0.0;
};

struct EvalReport {
  std::string dataset, subject, session;
  std::vector<ReportRow> rows;
  std::vector<EpisodeOutcome> outcomes;
  std::vector<TraceRow> trace_asap;
  std::vector<TraceRow> trace_om;
  // Held-out single-trial MDM performance.
  double trial_balanced_accuracy = 0.0;
  int n_train_trials = 0;
  int n_test_trials = 0;
  nlohmann::json config;
};

// Everything the pipeline learns from the calibration episodes.
struct TrainedPipeline {
  Prototype prototype;
  ClassModel model;
};

namespace detail {

inline void require_labels(const SessionRecord& s, const Episode& ep) {
  for (std::size_t i = ep.begin; i < ep.end; ++i) {
    if (!s.events[i].is_target) {
      throw Error(ErrorCode::MissingLabels, "episode " + std::to_string(ep.id) + " has unlabelled flashes");
    }
  }
}

}  // namespace detail

inline std::vector<Trial> filtered_trials(const SessionRecord& s, const PipelineConfig& cfg) {
  const RawRecording filtered = bandpass_filter(s.recording, cfg.bandpass);
  return epoch(filtered, s.events, s.epoch_seconds);
}

// Fits prototype and class centers on the trials of `train` episodes.
inline TrainedPipeline train_pipeline(const SessionRecord& s, std::span<const Trial> trials,
                                      std::span<const Episode> train, const PipelineConfig& cfg) {
  std::vector<Trial> targets;
  for (const auto& ep : train) {
    detail::require_labels(s, ep);
    for (std::size_t i = ep.begin; i < ep.end; ++i) {
      if (trials[i].label == ErpClass::Target) targets.push_back(trials[i]);
    }
  }
  Prototype proto = estimate_prototype(targets);
  std::vector<SpdMatrix> features;
  std::vector<ErpClass> labels;
  for (const auto& ep : train) {
    for (std::size_t i = ep.begin; i < ep.end; ++i) {
      features.push_back(extended_covariance(trials[i], proto, cfg.shrinkage));
      labels.push_back(*trials[i].label);
    }
  }
  ClassModel model = fit_mdm(features, labels, cfg.karcher);
  return TrainedPipeline{std::move(proto), std::move(model)};
}

inline TrainedPipeline train_on_session(const SessionRecord& s, const PipelineConfig& cfg) {
  validate_session(s);
  const auto eps = episodes(s);
  if (static_cast<int>(eps.size()) < cfg.n_train_episodes || cfg.n_train_episodes < 1) {
    throw Error(ErrorCode::InsufficientTraining, "session has " + std::to_string(eps.size()) + " episodes");
  }
  const auto trials = filtered_trials(s, cfg);
  return train_pipeline(s, trials, std::span(eps).first(static_cast<std::size_t>(cfg.n_train_episodes)), cfg);
}

inline EvalReport run_within_session(const SessionRecord& s, const PipelineConfig& cfg = {}) {
  validate_session(s);
  const auto eps = episodes(s);
  if (cfg.n_train_episodes < 1 || static_cast<int>(eps.size()) <= cfg.n_train_episodes) {
    throw Error(ErrorCode::InsufficientTraining, "need more than " + std::to_string(cfg.n_train_episodes) +
                                                     " episodes, session has " + std::to_string(eps.size()));
  }
  if (cfg.priors && static_cast<int>(cfg.priors->size()) != s.L) {
    throw Error(ErrorCode::BadPrior, "prior length does not match L");
  }
  const auto train_eps = std::span(eps).first(static_cast<std::size_t>(cfg.n_train_episodes));
  const auto test_eps = std::span(eps).subspan(static_cast<std::size_t>(cfg.n_train_episodes));
  for (const auto& ep : test_eps) {
    detail::require_labels(s, ep);
    if (!ep.target) throw Error(ErrorCode::MissingLabels, "cannot infer target of episode " + std::to_string(ep.id));
  }

  const int per_rep = flashes_per_repetition(s);
  const auto trials = filtered_trials(s, cfg);
  const TrainedPipeline trained = train_pipeline(s, trials, train_eps, cfg);
  const ClassModel& model = trained.model;

  EvalReport report;
  report.dataset = s.dataset_id;
  report.subject = s.subject_id;
  report.session = s.session_id;
  report.config = to_json(cfg);
  for (const auto& ep : train_eps) report.n_train_trials += static_cast<int>(ep.size());

  std::optional<std::span<const double>> priors;
  if (cfg.priors) priors = std::span<const double>(*cfg.priors);

  int max_reps = 0;
  int tp = 0, fn = 0, tn = 0, fp = 0;
  for (const auto& ep : test_eps) {
    if (ep.size() % static_cast<std::size_t>(per_rep) != 0) {
      throw Error(ErrorCode::FormatError, "episode " + std::to_string(ep.id) + " is not a whole number of repetitions");
    }
    const int target = *ep.target;
    auto asap_state = init_accumulator(s.L, priors, AccumulatorMode::ASAP);
    auto om_state = init_accumulator(s.L, std::nullopt, AccumulatorMode::OM);

    auto snapshot = [&](const AccumulatorState& st, const char* method, int rep) {
      const Decision d = decide(st);
      double nt = 0.0;
      for (int l = 0; l < s.L; ++l) {
        if (l != target) nt += st.probability(l);
      }
      report.outcomes.push_back(EpisodeOutcome{method, ep.id, target, rep, d.character, st.probability(target),
                                               nt / (s.L - 1)});
    };
    auto trace = [&](std::vector<TraceRow>& out, const AccumulatorState& st) {
      for (int l = 0; l < s.L; ++l) out.push_back(TraceRow{ep.id, st.t, l, st.probability(l)});
    };

    for (std::size_t i = ep.begin; i < ep.end; ++i) {
      const Trial& trial = trials[i];
      const SpdMatrix feature = extended_covariance(trial, trained.prototype, cfg.shrinkage);
      const CenterDistances d = center_distances(model, feature);
      const ErpClass predicted = mdm_decide(d);
      const LogLikelihoods llh = pmdm_log_likelihoods(model, d, cfg.equal_dispersion);

      const bool is_t = *trial.label == ErpClass::Target;
      const bool said_t = predicted == ErpClass::Target;
      (is_t ? (said_t ? tp : fn) : (said_t ? fp : tn))++;
      ++report.n_test_trials;

      asap_state = asap_update(std::move(asap_state), llh.T, llh.NT, trial.event.flashed);
      om_state = om_update(std::move(om_state), predicted, trial.event.flashed);
      if (cfg.record_traces) {
        trace(report.trace_asap, asap_state);
        trace(report.trace_om, om_state);
      }
      const auto done = i + 1 - ep.begin;
      if (done % static_cast<std::size_t>(per_rep) == 0) {
        const int rep = static_cast<int>(done / static_cast<std::size_t>(per_rep));
        snapshot(asap_state, kMethodAsap, rep);
        snapshot(om_state, kMethodOm, rep);
        max_reps = std::max(max_reps, rep);
      }
    }
  }
  const double sens = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  const double spec = tn + fp > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
  report.trial_balanced_accuracy = 0.5 * (sens + spec);

  for (const char* method : {kMethodAsap, kMethodOm}) {
    for (int r = 1; r <= max_reps; ++r) {
      int n = 0, correct = 0;
      double pt = 0.0, pnt = 0.0;
      for (const auto& o : report.outcomes) {
        if (o.method != method || o.repetition != r) continue;
        ++n;
        correct += o.predicted == o.target;
        pt += o.target_probability;
        pnt += o.mean_nontarget_probability;
      }
      if (n == 0) continue;
      ReportRow row;
      row.method = method;
      row.dataset = s.dataset_id;
      row.subject = s.subject_id;
      row.session = s.session_id;
      row.repetition = r;
      row.n_episodes = n;
      row.accuracy = static_cast<double>(correct) / n;
      row.ci95_half_width = 1.96 * std::sqrt(row.accuracy * (1.0 - row.accuracy) / n);
      row.mean_target_probability = pt / n;
      row.mean_nontarget_probability = pnt / n;
      row.itr_bits_per_min = itr(row.accuracy, s.L, seconds_per_selection(r, per_rep, s.soa_ms, cfg.overhead_seconds));
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report files

inline constexpr const char* kResultsHeader =
    "method,dataset,subject,session,repetition,accuracy,itr_bits_per_min,n_episodes";

inline std::string results_csv(std::span<const ReportRow> rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    out += r.method + "," + r.dataset + "," + r.subject + "," + r.session + "," + std::to_string(r.repetition) + "," +
           io::format_double(r.accuracy) + "," + io::format_double(r.itr_bits_per_min) + "," +
           std::to_string(r.n_episodes) + "\n";
  }
  return out;
}

inline std::vector<ReportRow> parse_results_csv(const std::string& text, const std::string& name = "results.csv") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || io::trim_cr(line) != kResultsHeader) {
    throw Error(ErrorCode::FormatError, name + ": unexpected header");
  }
  std::vector<ReportRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = io::trim_cr(line);
    if (view.empty()) continue;
    const auto c = io::split(view, ',');
    const std::string ctx = name + ":" + std::to_string(lineno);
    if (c.size() != 8) throw Error(ErrorCode::FormatError, ctx + ": expected 8 columns");
    ReportRow r;
    r.method = c[0];
    r.dataset = c[1];
    r.subject = c[2];
    r.session = c[3];
    r.repetition = static_cast<int>(io::parse_int(c[4], ctx));
    r.accuracy = io::parse_double(c[5], ctx);
    r.itr_bits_per_min = io::parse_double(c[6], ctx);
    r.n_episodes = static_cast<int>(io::parse_int(c[7], ctx));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string trace_csv(std::span<const EvalReport> reports, bool asap) {
  std::string out = "episode_id,t,character,probability\n";
  for (const auto& rep : reports) {
    for (const auto& t : asap ? rep.trace_asap : rep.trace_om) {
      out += std::to_string(t.episode_id) + "," + std::to_string(t.t) + "," + std::to_string(t.character) + "," +
             io::format_double(t.probability) + "\n";
    }
  }
  return out;
}

inline nlohmann::json summary_json(std::span<const EvalReport> reports) {
  nlohmann::json sessions = nlohmann::json::array();
  for (const auto& rep : reports) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows) {
      rows.push_back({{"method", r.method},
                      {"repetition", r.repetition},
                      {"accuracy", r.accuracy},
                      {"ci95_half_width", r.ci95_half_width},
                      {"itr_bits_per_min", r.itr_bits_per_min},
                      {"mean_target_probability", r.mean_target_probability},
                      {"mean_nontarget_probability", r.mean_nontarget_probability},
                      {"n_episodes", r.n_episodes}});
    }
    sessions.push_back({{"dataset", rep.dataset},
                        {"subject", rep.subject},
                        {"session", rep.session},
                        {"trial_balanced_accuracy", rep.trial_balanced_accuracy},
                        {"n_train_trials", rep.n_train_trials},
                        {"n_test_trials", rep.n_test_trials},
                        {"config", rep.config},
                        {"rows", rows}});
  }
  return {{"version", kVersion}, {"sessions", sessions}};
}

// Writes results.csv, trace_asap.csv, trace_om.csv and summary.json into `dir`.
inline void emit_report(std::span<const EvalReport> reports, const std::filesystem::path& dir) {
  if (reports.empty()) throw Error(ErrorCode::BadArgument, "no reports to write");
  std::vector<ReportRow> rows;
  for (const auto& r : reports) {
    if (r.rows.empty()) throw Error(ErrorCode::BadArgument, "report for " + r.subject + " has no rows");
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  }
  // Render everything before touching the filesystem.
  const std::string results = results_csv(rows);
  const std::string trace_a = trace_csv(reports, true);
  const std::string trace_o = trace_csv(reports, false);
  const std::string summary = summary_json(reports).dump(2) + "\n";
  io::write_atomic(dir / "results.csv", results);
  io::write_atomic(dir / "trace_asap.csv", trace_a);
  io::write_atomic(dir / "trace_om.csv", trace_o);
  io::write_atomic(dir / "summary.json", summary);
}

inline void emit_report(const EvalReport& report, const std::filesystem::path& dir) {
  emit_report(std::span(&report, 1), dir);
}

}  // namespace asap
