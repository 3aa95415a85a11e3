// asap_cli: simulate sessions, evaluate ASAP against MDM+OM, train and replay
// models, merge result tables.
//
// Exit status: 0 success, 1 runtime failure, 2 usage error.

#include "asap/asap.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace asap;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw UsageError(msg);
}

std::string num(double v) { return io::format_double(v); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Every run records what produced it. `args` are the canonical flags that
// regenerate the same outputs through --from-run.
void write_run_json(const fs::path& out, const std::string& command, const std::vector<std::string>& args,
                    json config, json extra = json::object()) {
  json j = {{"version", kVersion}, {"command", command}, {"args", args}, {"config", std::move(config)}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  io::write_atomic(out / "run.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Pipeline flags shared by evaluate, train and replay

struct PipelineFlags {
  PipelineConfig cfg;
  std::vector<double> priors;
  bool unequal_dispersion = false;
};

void add_pipeline_flags(CLI::App* app, PipelineFlags& f, bool with_training) {
  app->add_option("--band-low-hz", f.cfg.bandpass.low_hz, "Band-pass lower edge")->capture_default_str();
  app->add_option("--band-high-hz", f.cfg.bandpass.high_hz, "Band-pass upper edge")->capture_default_str();
  app->add_option("--filter-order", f.cfg.bandpass.order, "Butterworth order of each edge")->capture_default_str();
  app->add_option("--shrinkage", f.cfg.shrinkage, "Covariance shrinkage toward scaled identity")
      ->capture_default_str();
  app->add_flag("--unequal-dispersion", f.unequal_dispersion, "Scale log-likelihoods by per-class dispersion");
  app->add_option("--priors", f.priors, "Comma-separated prior over characters (default uniform)")->delimiter(',');
  if (with_training) {
    app->add_option("--karcher-tol", f.cfg.karcher.tol, "Karcher mean gradient tolerance")->capture_default_str();
    app->add_option("--karcher-max-iter", f.cfg.karcher.max_iter, "Karcher mean iteration cap")
        ->capture_default_str();
    app->add_option("--train-episodes", f.cfg.n_train_episodes, "Calibration episodes at the start of each session")
        ->capture_default_str();
  }
}

void finish_pipeline_flags(PipelineFlags& f) {
  auto& c = f.cfg;
  require(c.bandpass.low_hz > 0.0 && c.bandpass.low_hz < c.bandpass.high_hz, "--band-low-hz must lie in (0, high)");
  require(c.bandpass.order >= 2 && c.bandpass.order % 2 == 0, "--filter-order must be even and >= 2");
  require(c.shrinkage >= 0.0 && std::isfinite(c.shrinkage), "--shrinkage must be nonnegative");
  require(c.karcher.tol > 0.0, "--karcher-tol must be positive");
  require(c.karcher.max_iter >= 1, "--karcher-max-iter must be >= 1");
  require(c.n_train_episodes >= 1, "--train-episodes must be >= 1");
  require(c.overhead_seconds >= 0.0 && std::isfinite(c.overhead_seconds), "--overhead-seconds must be >= 0");
  c.equal_dispersion = !f.unequal_dispersion;
  if (!f.priors.empty()) {
    double sum = 0.0;
    for (double p : f.priors) {
      require(p >= 0.0, "--priors entries must be nonnegative");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "--priors must sum to 1");
    c.priors = f.priors;
  }
}

void check_against_session(const PipelineConfig& c, const SessionRecord& s, const fs::path& where) {
  if (c.priors && static_cast<int>(c.priors->size()) != s.L) {
    throw UsageError("--priors has " + std::to_string(c.priors->size()) + " entries but " + where.string() +
                     " has L = " + std::to_string(s.L));
  }
  if (!(c.bandpass.high_hz < s.recording.fs_hz / 2.0)) {
    throw UsageError("--band-high-hz must lie below Nyquist of " + where.string());
  }
}

std::vector<std::string> pipeline_args(const PipelineFlags& f, bool with_training) {
  const auto& c = f.cfg;
  std::vector<std::string> a{"--band-low-hz",  num(c.bandpass.low_hz),        "--band-high-hz", num(c.bandpass.high_hz),
                             "--filter-order", std::to_string(c.bandpass.order), "--shrinkage",    num(c.shrinkage)};
  if (with_training) {
    a.insert(a.end(), {"--karcher-tol", num(c.karcher.tol), "--karcher-max-iter", std::to_string(c.karcher.max_iter),
                       "--train-episodes", std::to_string(c.n_train_episodes)});
  }
  if (f.unequal_dispersion) a.push_back("--unequal-dispersion");
  if (!f.priors.empty()) {
    std::string joined;
    for (double p : f.priors) joined += (joined.empty() ? "" : ",") + num(p);
    a.insert(a.end(), {"--priors", joined});
  }
  return a;
}

// A path is either a session directory or a directory of session directories.
std::vector<fs::path> find_sessions(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::exists(p / "session.json")) {
      out.push_back(p);
      continue;
    }
    if (!fs::is_directory(p)) throw Error(ErrorCode::IoError, in + ": not a session directory");
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_directory() && fs::exists(e.path() / "session.json")) found.push_back(e.path());
    }
    if (found.empty()) throw Error(ErrorCode::IoError, in + ": no session directories inside");
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  SimConfig sim;
  std::string flash_mode = "row_column";
  int sessions = 1;
  int chars = 35;
  std::string out;
};

void setup_simulate(CLI::App* app, SimulateArgs& a) {
  app->add_option("--out", a.out, "Output directory (one subdirectory per session)")->required();
  app->add_option("--sessions", a.sessions, "Number of sessions")->capture_default_str();
  app->add_option("--chars", a.chars, "Characters spelled per session")->capture_default_str();
  app->add_option("--reps", a.sim.n_repetitions, "Repetitions per character")->capture_default_str();
  app->add_option("--seed", a.sim.seed, "Base seed")->capture_default_str();
  app->add_option("--alphabet-size", a.sim.L, "Number of selectable characters")->capture_default_str();
  app->add_option("--channels", a.sim.channels, "EEG channels")->capture_default_str();
  app->add_option("--fs-hz", a.sim.fs_hz, "Sampling rate")->capture_default_str();
  app->add_option("--soa-ms", a.sim.soa_ms, "Stimulus onset asynchrony")->capture_default_str();
  app->add_option("--epoch-seconds", a.sim.epoch_seconds, "Epoch length after each flash")->capture_default_str();
  app->add_option("--pause-seconds", a.sim.pause_seconds, "Silence between characters")->capture_default_str();
  app->add_option("--erp-amplitude", a.sim.erp_amplitude, "P300 peak scale")->capture_default_str();
  app->add_option("--noise-scale", a.sim.noise_scale, "Background noise scale")->capture_default_str();
  app->add_option("--common-noise-fraction", a.sim.common_noise_fraction, "Noise power shared across channels")
      ->capture_default_str();
  app->add_option("--flash-mode", a.flash_mode, "row_column or pseudo_random")
      ->check(CLI::IsMember({"row_column", "pseudo_random"}))
      ->capture_default_str();
}

int run_simulate(SimulateArgs& a) {
  require(a.sessions >= 1, "--sessions must be >= 1");
  require(a.chars >= 1, "--chars must be >= 1");
  a.sim.flash_mode = a.flash_mode == "row_column" ? FlashMode::RowColumn : FlashMode::PseudoRandom;
  try {
    check_config(a.sim);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const SimConfig& c = a.sim;
  const fs::path out(a.out);
  json sessions = json::array();
  for (int i = 1; i <= a.sessions; ++i) {
    SimConfig ci = c;
    ci.seed = session_seed(c.seed, static_cast<std::uint64_t>(i));
    const auto targets = random_targets(ci, a.chars);
    SessionRecord s = generate_session(ci, targets);
    char name[32];
    std::snprintf(name, sizeof name, "sim%02d", i);
    s.subject_id = name;
    s.session_id = "1";
    write_session(s, out / name);
    std::cout << name << ": " << a.chars << " characters, " << s.events.size() << " flashes, "
              << s.recording.channels() << " channels x " << s.recording.length() << " samples -> "
              << (out / name).string() << "\n";
    sessions.push_back({{"dir", name}, {"seed", ci.seed}, {"targets", targets}});
  }
  const json config = {{"sessions", a.sessions},
                       {"chars", a.chars},
                       {"reps", c.n_repetitions},
                       {"seed", c.seed},
                       {"alphabet_size", c.L},
                       {"channels", c.channels},
                       {"fs_hz", c.fs_hz},
                       {"soa_ms", c.soa_ms},
                       {"epoch_seconds", c.epoch_seconds},
                       {"pause_seconds", c.pause_seconds},
                       {"erp_amplitude", c.erp_amplitude},
                       {"noise_scale", c.noise_scale},
                       {"common_noise_fraction", c.common_noise_fraction},
                       {"flash_mode", a.flash_mode}};
  const std::vector<std::string> args{"--sessions",  std::to_string(a.sessions),
                                      "--chars",     std::to_string(a.chars),
                                      "--reps",      std::to_string(c.n_repetitions),
                                      "--seed",      std::to_string(c.seed),
                                      "--alphabet-size", std::to_string(c.L),
                                      "--channels",  std::to_string(c.channels),
                                      "--fs-hz",     num(c.fs_hz),
                                      "--soa-ms",    num(c.soa_ms),
                                      "--epoch-seconds", num(c.epoch_seconds),
                                      "--pause-seconds", num(c.pause_seconds),
                                      "--erp-amplitude", num(c.erp_amplitude),
                                      "--noise-scale", num(c.noise_scale),
                                      "--common-noise-fraction", num(c.common_noise_fraction),
                                      "--flash-mode", a.flash_mode};
  write_run_json(out, "simulate", args, config, {{"sessions", sessions}});
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  PipelineFlags pipe;
  std::vector<std::string> data;
  std::string out;
};

void setup_evaluate(CLI::App* app, EvaluateArgs& a) {
  app->add_option("--data", a.data, "Session directories, or directories containing them")->required();
  app->add_option("--out", a.out, "Report directory")->required();
  add_pipeline_flags(app, a.pipe, true);
  app->add_option("--overhead-seconds", a.pipe.cfg.overhead_seconds, "Time added to each selection for ITR")
      ->capture_default_str();
  app->add_flag("--traces", a.pipe.cfg.record_traces, "Write per-flash posterior traces");
}

int run_evaluate(EvaluateArgs& a) {
  finish_pipeline_flags(a.pipe);
  const PipelineConfig& cfg = a.pipe.cfg;
  const auto dirs = find_sessions(a.data);
  std::vector<SessionRecord> sessions;
  for (const auto& d : dirs) {
    sessions.push_back(read_session(d));
    check_against_session(cfg, sessions.back(), d);
  }

  std::vector<EvalReport> reports;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    try {
      reports.push_back(run_within_session(sessions[i], cfg));
    } catch (const Error& e) {
      throw Error(e.code(), dirs[i].string() + ": " + e.what());
    }
    const auto& r = reports.back();
    std::cout << r.subject << "/" << r.session << ": " << r.n_train_trials << " training trials, "
              << r.n_test_trials << " test trials, single-trial balanced accuracy "
              << fixed(r.trial_balanced_accuracy, 3) << "\n";
  }

  // Mean over sessions of per-session accuracy.
  std::map<int, std::map<std::string, std::pair<double, int>>> table;
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      auto& cell = table[row.repetition][row.method];
      cell.first += row.accuracy;
      cell.second += 1;
    }
  }
  std::cout << "repetition    ASAP  MDM+OM\n";
  for (const auto& [rep, cells] : table) {
    auto mean = [&](const char* m) {
      const auto it = cells.find(m);
      return it == cells.end() ? std::string("   -") : fixed(it->second.first / it->second.second, 2);
    };
    char line[96];
    std::snprintf(line, sizeof line, "%10d  %6s  %6s\n", rep, mean(kMethodAsap).c_str(), mean(kMethodOm).c_str());
    std::cout << line;
  }

  const fs::path out(a.out);
  emit_report(reports, out);
  std::vector<std::string> args{"--data"};
  args.insert(args.end(), a.data.begin(), a.data.end());
  const auto p = pipeline_args(a.pipe, true);
  args.insert(args.end(), p.begin(), p.end());
  args.insert(args.end(), {"--overhead-seconds", num(cfg.overhead_seconds)});
  if (cfg.record_traces) args.push_back("--traces");
  json inputs = json::array();
  for (const auto& d : dirs) inputs.push_back(d.string());
  write_run_json(out, "evaluate", args, to_json(cfg), {{"inputs", inputs}});
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  PipelineFlags pipe;
  std::string data;
  std::string out;
};

void setup_train(CLI::App* app, TrainArgs& a) {
  app->add_option("--data", a.data, "Session directory")->required();
  app->add_option("--out", a.out, "Output directory for model.asapmodel")->required();
  add_pipeline_flags(app, a.pipe, true);
}

int run_train(TrainArgs& a) {
  finish_pipeline_flags(a.pipe);
  const SessionRecord s = read_session(a.data);
  check_against_session(a.pipe.cfg, s, a.data);
  const TrainedPipeline trained = train_on_session(s, a.pipe.cfg);
  const fs::path out(a.out);
  save_model(trained, out / "model.asapmodel");
  std::cout << "trained on " << a.pipe.cfg.n_train_episodes << " episodes: feature order " << trained.model.order()
            << ", sigma_T " << fixed(trained.model.sigma_T, 4) << ", sigma_NT " << fixed(trained.model.sigma_NT, 4)
            << " -> " << (out / "model.asapmodel").string() << "\n";
  std::vector<std::string> args{"--data", a.data};
  const auto p = pipeline_args(a.pipe, true);
  args.insert(args.end(), p.begin(), p.end());
  write_run_json(out, "train", args, to_json(a.pipe.cfg), {{"inputs", json::array({a.data})}});
  return 0;
}

// ---------------------------------------------------------------------------
// replay

struct ReplayArgs {
  PipelineFlags pipe;
  std::string model;
  std::string data;
  std::string out;
  std::vector<int> episodes;
};

void setup_replay(CLI::App* app, ReplayArgs& a) {
  app->add_option("--model", a.model, "Model file written by train")->required();
  app->add_option("--data", a.data, "Session directory")->required();
  app->add_option("--out", a.out, "Directory for posterior traces")->required();
  app->add_option("--episode", a.episodes, "Episode ids to replay (default all)")->delimiter(',');
  add_pipeline_flags(app, a.pipe, false);
}

int run_replay(ReplayArgs& a) {
  finish_pipeline_flags(a.pipe);
  const PipelineConfig& cfg = a.pipe.cfg;
  const TrainedPipeline trained = load_model(a.model);
  const SessionRecord s = read_session(a.data);
  check_against_session(cfg, s, a.data);
  validate_session(s);
  if (trained.prototype.P.rows() != s.recording.channels() ||
      trained.prototype.P.cols() != epoch_samples(s.epoch_seconds, s.recording.fs_hz)) {
    throw Error(ErrorCode::DimensionMismatch, a.model + ": model shape does not match " + a.data);
  }
  const auto eps = episodes(s);
  const std::set<int> wanted(a.episodes.begin(), a.episodes.end());
  for (int id : wanted) {
    if (std::none_of(eps.begin(), eps.end(), [&](const Episode& e) { return e.id == id; })) {
      throw UsageError("episode " + std::to_string(id) + " not in " + a.data);
    }
  }
  const auto trials = filtered_trials(s, cfg);
  std::optional<std::span<const double>> priors;
  if (cfg.priors) priors = std::span<const double>(*cfg.priors);

  std::vector<TraceRow> trace_a, trace_o;
  std::cout << "episode_id,t,flashed_characters,mdm_class,asap_best,asap_probability,om_best,om_probability,"
               "target,asap_target_probability\n";
  for (const auto& ep : eps) {
    if (!wanted.empty() && !wanted.count(ep.id)) continue;
    auto sa = init_accumulator(s.L, priors, AccumulatorMode::ASAP);
    auto so = init_accumulator(s.L, std::nullopt, AccumulatorMode::OM);
    for (std::size_t i = ep.begin; i < ep.end; ++i) {
      const Trial& tr = trials[i];
      const auto d = center_distances(trained.model, extended_covariance(tr, trained.prototype, cfg.shrinkage));
      const auto llh = pmdm_log_likelihoods(trained.model, d, cfg.equal_dispersion);
      const ErpClass k = mdm_decide(d);
      sa = asap_update(std::move(sa), llh.T, llh.NT, tr.event.flashed);
      so = om_update(std::move(so), k, tr.event.flashed);
      for (int l = 0; l < s.L; ++l) {
        trace_a.push_back(TraceRow{ep.id, sa.t, l, sa.probability(l)});
        trace_o.push_back(TraceRow{ep.id, so.t, l, so.probability(l)});
      }
      const Decision da = decide(sa);
      const Decision dom = decide(so);
      std::string flashed;
      for (int l : tr.event.flashed) flashed += (flashed.empty() ? "" : "|") + std::to_string(l);
      std::cout << ep.id << "," << sa.t << "," << flashed << "," << (k == ErpClass::Target ? "T" : "NT") << ","
                << da.character << "," << fixed(da.probability, 6) << "," << dom.character << ","
                << fixed(dom.probability, 6) << ",";
      if (ep.target) {
        std::cout << *ep.target << "," << fixed(sa.probability(*ep.target), 6) << "\n";
      } else {
        std::cout << "NA,NA\n";
      }
    }
  }

  EvalReport bundle;
  bundle.trace_asap = std::move(trace_a);
  bundle.trace_om = std::move(trace_o);
  const fs::path out(a.out);
  const std::string ta = trace_csv(std::span(&bundle, 1), true);
  const std::string to = trace_csv(std::span(&bundle, 1), false);
  io::write_atomic(out / "trace_asap.csv", ta);
  io::write_atomic(out / "trace_om.csv", to);

  std::vector<std::string> args{"--model", a.model, "--data", a.data};
  if (!a.episodes.empty()) {
    std::string joined;
    for (int id : a.episodes) joined += (joined.empty() ? "" : ",") + std::to_string(id);
    args.insert(args.end(), {"--episode", joined});
  }
  const auto p = pipeline_args(a.pipe, false);
  args.insert(args.end(), p.begin(), p.end());
  write_run_json(out, "replay", args, to_json(cfg), {{"inputs", json::array({a.model, a.data})}});
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

void setup_report(CLI::App* app, ReportArgs& a) {
  app->add_option("--inputs", a.inputs, "results.csv files or directories containing one")->required();
  app->add_option("--out", a.out, "Directory for the merged tables")->required();
}

int run_report(ReportArgs& a) {
  std::vector<ReportRow> rows;
  std::set<std::tuple<std::string, std::string, std::string, std::string, int>> seen;
  for (const auto& in : a.inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) p /= "results.csv";
    for (auto& r : parse_results_csv(io::read_file(p), p.string())) {
      if (!seen.insert({r.method, r.dataset, r.subject, r.session, r.repetition}).second) {
        throw Error(ErrorCode::FormatError, p.string() + ": duplicate row for " + r.method + " " + r.subject + "/" +
                                                r.session + " repetition " + std::to_string(r.repetition));
      }
      rows.push_back(std::move(r));
    }
  }
  if (rows.empty()) throw Error(ErrorCode::FormatError, "no result rows in the inputs");

  struct Cell {
    double acc = 0.0, itr = 0.0;
    int n = 0;
  };
  std::map<std::pair<std::string, int>, Cell> cells;
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    auto& c = cells[{r.method, r.repetition}];
    c.acc += r.accuracy;
    c.itr += r.itr_bits_per_min;
    ++c.n;
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  }
  std::string summary = "method,repetition,mean_accuracy,mean_itr_bits_per_min,n_sessions\n";
  std::cout << "method  repetition  accuracy  itr_bits_per_min  sessions\n";
  for (const auto& m : methods) {
    for (const auto& [key, c] : cells) {
      if (key.first != m) continue;
      summary += m + "," + std::to_string(key.second) + "," + num(c.acc / c.n) + "," + num(c.itr / c.n) + "," +
                 std::to_string(c.n) + "\n";
      char line[128];
      std::snprintf(line, sizeof line, "%-6s  %10d  %8.3f  %16.2f  %8d\n", m.c_str(), key.second, c.acc / c.n,
                    c.itr / c.n, c.n);
      std::cout << line;
    }
  }
  const fs::path out(a.out);
  io::write_atomic(out / "results.csv", results_csv(rows));
  io::write_atomic(out / "summary.csv", summary);
  std::vector<std::string> args{"--inputs"};
  args.insert(args.end(), a.inputs.begin(), a.inputs.end());
  write_run_json(out, "report", args, json::object(), {{"inputs", a.inputs}});
  return 0;
}

// Replaces `--from-run FILE` by the arguments recorded in FILE.
std::vector<std::string> expand_from_run(std::vector<std::string> args) {
  const auto it = std::find(args.begin(), args.end(), "--from-run");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) throw UsageError("--from-run needs a file");
  const std::string file = *(it + 1);
  json j;
  try {
    j = json::parse(io::read_file(file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, file + ": " + e.what());
  }
  if (args.empty() || args.front() != j.value("command", "")) {
    throw UsageError(file + " was written by '" + j.value("command", "") + "', not this subcommand");
  }
  const auto recorded = j.at("args").get<std::vector<std::string>>();
  const auto pos = args.erase(it, it + 2);
  args.insert(pos, recorded.begin(), recorded.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASAP P300 speller pipeline: simulation, evaluation and replay"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateArgs sim_args;
  EvaluateArgs eval_args;
  TrainArgs train_args;
  ReplayArgs replay_args;
  ReportArgs report_args;
  std::string from_run;

  auto* sim = app.add_subcommand("simulate", "Write synthetic oddball sessions");
  auto* eval = app.add_subcommand("evaluate", "Within-session evaluation of ASAP and MDM+OM");
  auto* train = app.add_subcommand("train", "Fit and save a class model on a session's first episodes");
  auto* replay = app.add_subcommand("replay", "Stream a session through a saved model, printing posteriors");
  auto* report = app.add_subcommand("report", "Merge results.csv files and average per repetition");
  setup_simulate(sim, sim_args);
  setup_evaluate(eval, eval_args);
  setup_train(train, train_args);
  setup_replay(replay, replay_args);
  setup_report(report, report_args);
  for (auto* sub : {sim, eval, train, replay}) {
    sub->add_option("--from-run", from_run, "Reuse every other parameter recorded in a run.json");
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_from_run(std::move(args));
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : 2;
    }
    if (*sim) return run_simulate(sim_args);
    if (*eval) return run_evaluate(eval_args);
    if (*train) return run_train(train_args);
    if (*replay) return run_replay(replay_args);
    return run_report(report_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
