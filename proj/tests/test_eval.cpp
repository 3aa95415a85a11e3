#include "asap/eval.hpp"
#include "asap/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <string>

#include <unistd.h>

using namespace asap;
namespace fs = std::filesystem;

namespace {

SessionRecord sim_session(double noise, double amp, int chars, int reps, std::uint64_t seed = 1, double soa_ms = 250.0) {
  SimConfig c;
  c.soa_ms = soa_ms;
  c.noise_scale = noise;
  c.erp_amplitude = amp;
  c.n_repetitions = reps;
  c.seed = seed;
  auto s = generate_session(c, random_targets(c, chars));
  s.subject_id = "S" + std::to_string(seed);
  return s;
}

}  // namespace

TEST(Itr, Endpoints) {
  EXPECT_NEAR(itr(1.0, 36, 60.0), std::log2(36.0), 1e-12);
  EXPECT_NEAR(itr(1.0, 36, 60.0), 5.1699, 1e-4);
  EXPECT_EQ(itr(1.0 / 36.0, 36, 10.0), 0.0);
  EXPECT_EQ(itr(0.0, 36, 10.0), 0.0);
  EXPECT_THROW(itr(1.5, 36, 1.0), Error);
  EXPECT_THROW(itr(0.5, 1, 1.0), Error);
  EXPECT_THROW(itr(0.5, 36, 0.0), Error);
}

TEST(Itr, StrictlyIncreasingAboveChance) {
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double p = 1.0 / 36.0 + (1.0 - 1.0 / 36.0) * i / 100.0;
    const double v = itr(p, 36, 6.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Itr, TimingModelAtTwoRepetitions) {
  // 0.69 accuracy after 2 repetitions of 12 flashes at 250 ms SOA with no
  // overhead, against a reference of 28.9 bits/min averaged over subjects.
  // A mean of per-subject ITRs need not equal the ITR of the mean accuracy,
  // so only closeness is checked.
  const double spt = seconds_per_selection(2, 12, 250.0, 0.0);
  EXPECT_DOUBLE_EQ(spt, 6.0);
  const double v = itr(0.69, 36, spt);
  EXPECT_NEAR(v, 26.86, 0.01);
  EXPECT_NEAR(v / 28.9, 1.0, 0.1);
}

TEST(RunWithinSession, NoiselessIsPerfect) {
  // Epochs must not overlap neighbouring responses for exact separability.
  const auto s = sim_session(0.0, 1.0, 10, 3, 1, 1000.0);
  const auto r = run_within_session(s);
  ASSERT_EQ(r.rows.size(), 6u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.accuracy, 1.0) << row.method << " rep " << row.repetition;
    EXPECT_EQ(row.n_episodes, 4);
  }
}

TEST(RunWithinSession, Errors) {
  const auto few = sim_session(1.0, 1.0, 6, 1);
  try {
    run_within_session(few);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientTraining);
  }
  auto unlabelled = sim_session(1.0, 1.0, 8, 1);
  unlabelled.events.back().is_target.reset();
  try {
    run_within_session(unlabelled);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLabels);
  }
}

TEST(RunWithinSession, TrainingSeesOnlyCalibrationEpisodes) {
  const auto s = sim_session(1.0, 1.0, 9, 2, 4);
  auto altered = s;
  const auto eps = episodes(s);
  const auto first_test = static_cast<Eigen::Index>(s.events[eps[6].begin].onset);
  // Filtering is zero-phase, so leave a margin before the first test onset.
  const Eigen::Index cut = first_test + 2048;
  altered.recording.samples.rightCols(altered.recording.length() - cut).setRandom();
  const PipelineConfig cfg;
  const auto a = train_on_session(s, cfg);
  const auto b = train_on_session(altered, cfg);
  // Changes far after the calibration block cannot leak into the model.
  EXPECT_LT((a.model.center_T.matrix() - b.model.center_T.matrix()).norm(), 1e-9);
  EXPECT_LT((a.model.center_NT.matrix() - b.model.center_NT.matrix()).norm(), 1e-9);
}

TEST(RunWithinSession, AggregationMatchesIndependentPass) {
  const auto s = sim_session(1.0, 0.8, 14, 4, 8);
  const auto r = run_within_session(s);
  std::map<std::pair<std::string, int>, std::pair<int, int>> tally;
  for (const auto& o : r.outcomes) {
    auto& t = tally[{o.method, o.repetition}];
    t.first += o.predicted == o.target;
    t.second += 1;
  }
  ASSERT_EQ(r.rows.size(), tally.size());
  for (const auto& row : r.rows) {
    const auto& t = tally.at({row.method, row.repetition});
    EXPECT_DOUBLE_EQ(row.accuracy, static_cast<double>(t.first) / t.second);
    EXPECT_EQ(row.n_episodes, t.second);
    EXPECT_GE(row.accuracy, 0.0);
    EXPECT_LE(row.accuracy, 1.0);
    const double spt = seconds_per_selection(row.repetition, 12, 250.0, 0.0);
    EXPECT_DOUBLE_EQ(row.itr_bits_per_min, itr(row.accuracy, 36, spt));
  }
  EXPECT_EQ(r.n_test_trials, 8 * 48);
  EXPECT_EQ(r.n_train_trials, 6 * 48);
}

TEST(RunWithinSession, TracesCoverEveryFlashAndCharacter) {
  const auto s = sim_session(1.0, 1.0, 8, 2, 3);
  PipelineConfig cfg;
  cfg.record_traces = true;
  const auto r = run_within_session(s, cfg);
  EXPECT_EQ(r.trace_asap.size(), 2u * 24u * 36u);
  EXPECT_EQ(r.trace_om.size(), r.trace_asap.size());
  // Each flash of the ASAP trace is a normalized distribution.
  for (std::size_t i = 0; i < r.trace_asap.size(); i += 36) {
    double sum = 0.0;
    for (std::size_t l = 0; l < 36; ++l) sum += r.trace_asap[i + l].probability;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(EmitReport, CsvRowCountAndRoundTrip) {
  const auto r = run_within_session(sim_session(1.0, 0.8, 9, 3, 2));
  const auto dir = fs::temp_directory_path() / ("asap_emit_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  emit_report(r, dir);
  for (const char* f : {"results.csv", "trace_asap.csv", "trace_om.csv", "summary.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto rows = parse_results_csv(io::read_file(dir / "results.csv"));
  int asap_rows = 0;
  for (const auto& row : rows) asap_rows += row.method == kMethodAsap;
  EXPECT_EQ(asap_rows, 3);
  ASSERT_EQ(rows.size(), r.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].method, r.rows[i].method);
    EXPECT_EQ(rows[i].subject, r.rows[i].subject);
    EXPECT_EQ(rows[i].repetition, r.rows[i].repetition);
    EXPECT_EQ(rows[i].accuracy, r.rows[i].accuracy);
    EXPECT_EQ(rows[i].itr_bits_per_min, r.rows[i].itr_bits_per_min);
    EXPECT_EQ(rows[i].n_episodes, r.rows[i].n_episodes);
  }
  const auto summary = nlohmann::json::parse(io::read_file(dir / "summary.json"));
  EXPECT_TRUE(summary["sessions"][0]["config"].contains("shrinkage"));
  fs::remove_all(dir);
}

TEST(EmitReport, EmptyTestSetWritesNothing) {
  const auto dir = fs::temp_directory_path() / ("asap_empty_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  try {
    emit_report(run_within_session(sim_session(1.0, 1.0, 6, 1)), dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientTraining);
  }
  EXPECT_FALSE(fs::exists(dir));
}
