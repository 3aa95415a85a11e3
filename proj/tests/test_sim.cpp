#include "asap/erp.hpp"
#include "asap/eval.hpp"
#include "asap/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

using namespace asap;

TEST(FlashSchedule, RowColumnCoverage) {
  SimConfig c;
  c.n_repetitions = 1;
  const auto evs = flash_schedule(c, 0);
  ASSERT_EQ(evs.size(), 12u);
  std::vector<int> seen(36, 0);
  int targets = 0;
  for (const auto& ev : evs) {
    EXPECT_EQ(ev.flashed.size(), 6u);
    for (int l : ev.flashed) ++seen[static_cast<std::size_t>(l)];
    targets += *ev.is_target;
    EXPECT_EQ(*ev.is_target, ev.contains(0));
  }
  for (int n : seen) EXPECT_EQ(n, 2);
  EXPECT_EQ(targets, 2);
}

TEST(FlashSchedule, TwoTargetFlashesPerRepetition) {
  SimConfig c;
  c.n_repetitions = 5;
  const auto evs = flash_schedule(c, 0);
  ASSERT_EQ(evs.size(), 60u);
  for (int r = 0; r < 5; ++r) {
    int t = 0;
    for (int i = 0; i < 12; ++i) t += *evs[static_cast<std::size_t>(12 * r + i)].is_target;
    EXPECT_EQ(t, 2);
  }
  EXPECT_EQ(evs[1].onset - evs[0].onset, 64);
}

TEST(FlashSchedule, Determinism) {
  SimConfig c;
  c.seed = 7;
  auto flat = [](const std::vector<FlashEvent>& evs) {
    std::vector<std::vector<int>> out;
    for (const auto& e : evs) out.push_back(e.flashed);
    return out;
  };
  const auto a = flat(flash_schedule(c, 3));
  EXPECT_EQ(a, flat(flash_schedule(c, 3)));
  c.seed = 8;
  EXPECT_NE(a, flat(flash_schedule(c, 3)));
}

TEST(FlashSchedule, PseudoRandomPartitions) {
  SimConfig c;
  c.flash_mode = FlashMode::PseudoRandom;
  c.n_repetitions = 3;
  const auto evs = flash_schedule(c, 10);
  ASSERT_EQ(evs.size(), 18u);
  for (int r = 0; r < 3; ++r) {
    std::vector<int> seen(36, 0);
    int t = 0;
    for (int i = 0; i < 6; ++i) {
      const auto& ev = evs[static_cast<std::size_t>(6 * r + i)];
      EXPECT_EQ(ev.flashed.size(), 6u);
      for (int l : ev.flashed) ++seen[static_cast<std::size_t>(l)];
      t += *ev.is_target;
    }
    for (int n : seen) EXPECT_EQ(n, 1);
    EXPECT_EQ(t, 1);
  }
}

TEST(FlashSchedule, BadConfig) {
  SimConfig c;
  c.L = 35;
  EXPECT_THROW(flash_schedule(c, 0), Error);
  c.L = 36;
  c.soa_ms = 251.0;  // 64.256 samples
  EXPECT_THROW(flash_schedule(c, 0), Error);
  c.soa_ms = 250.0;
  try {
    flash_schedule(c, 36);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadConfig);
  }
}

TEST(GenerateSession, NoiselessEpochsRecoverTemplate) {
  SimConfig c;
  c.noise_scale = 0.0;
  c.erp_amplitude = 1.0;
  c.soa_ms = 1000.0;  // epochs do not overlap, so no tail bleeds into the next one
  c.n_repetitions = 2;
  const std::vector<int> targets{0, 14, 35};
  const auto s = generate_session(c, targets);
  const auto trials = epoch(s.recording, s.events, c.epoch_seconds);
  const Matrix tpl = p300_template(c.channels, c.fs_hz, c.epoch_seconds);
  Matrix t_sum = Matrix::Zero(tpl.rows(), tpl.cols()), nt_sum = t_sum;
  int nt = 0, nnt = 0;
  for (const auto& tr : trials) {
    if (tr.label == ErpClass::Target) {
      t_sum += tr.data;
      ++nt;
    } else {
      nt_sum += tr.data;
      ++nnt;
    }
  }
  // Exact up to the rounding of the average itself.
  EXPECT_LT((t_sum / nt - tpl).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(nt_sum.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GenerateSession, TemplatePeaksAt300ms) {
  const Matrix tpl = p300_template(8, 256.0, 1.0);
  Eigen::Index arg = 0;
  tpl.row(7).maxCoeff(&arg);
  EXPECT_NEAR(static_cast<double>(arg) / 256.0, 0.3, 1.0 / 256.0);
  EXPECT_NEAR(tpl(7, arg), 1.0, 1e-3);
  // Posterior-weighted.
  EXPECT_LT(tpl.row(0).maxCoeff(), tpl.row(7).maxCoeff());
}

TEST(GenerateSession, ZeroAmplitudeGivesIndistinguishableClasses) {
  SimConfig c;
  c.erp_amplitude = 0.0;
  c.seed = 5;
  const auto s = generate_session(c, random_targets(c, 10));
  const auto trials = epoch(bandpass_filter(s.recording, 1.0, 20.0), s.events, 1.0);
  // Per-trial mean amplitude in the 250-450 ms window, averaged over channels.
  std::vector<double> t, nt;
  for (const auto& tr : trials) {
    const double v = tr.data.middleCols(64, 51).mean();
    (tr.label == ErpClass::Target ? t : nt).push_back(v);
  }
  auto moments = [](const std::vector<double>& x) {
    double m = 0, v = 0;
    for (double a : x) m += a;
    m /= static_cast<double>(x.size());
    for (double a : x) v += (a - m) * (a - m);
    return std::pair{m, v / static_cast<double>(x.size() - 1)};
  };
  const auto [mt, vt] = moments(t);
  const auto [mn, vn] = moments(nt);
  const double z = (mt - mn) / std::sqrt(vt / t.size() + vn / nt.size());
  const double p = std::erfc(std::abs(z) / std::sqrt(2.0));  // two-sided, large-sample
  EXPECT_GT(p, 0.01);
}

TEST(GenerateSession, TrialCountsMatchSchedule) {
  SimConfig c;
  const auto s = generate_session(c, random_targets(c, 10));
  std::map<int, std::pair<int, int>> counts;
  for (const auto& ev : s.events) (*ev.is_target ? counts[ev.episode_id].first : counts[ev.episode_id].second)++;
  ASSERT_EQ(counts.size(), 10u);
  for (const auto& [id, tn] : counts) {
    EXPECT_EQ(tn.first, 2 * c.n_repetitions);
    EXPECT_EQ(tn.second, 10 * c.n_repetitions);
  }
  EXPECT_EQ(flashes_per_repetition(s), 12);
}

TEST(GenerateSession, BitIdenticalForSameConfig) {
  SimConfig c;
  c.seed = 99;
  c.n_repetitions = 2;
  const std::vector<int> targets{3, 4, 5};
  const auto a = generate_session(c, targets);
  const auto b = generate_session(c, targets);
  EXPECT_EQ(a.recording.samples, b.recording.samples);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(a.events[i].onset, b.events[i].onset);
    EXPECT_EQ(a.events[i].flashed, b.events[i].flashed);
  }
  EXPECT_THROW(generate_session(c, std::vector<int>{}), Error);
}

TEST(GenerateSession, EventsRespectEpochBounds) {
  SimConfig c;
  c.n_repetitions = 3;
  const auto s = generate_session(c, random_targets(c, 4));
  for (const auto& ev : s.events) EXPECT_LE(ev.onset + 256, s.recording.length());
  EXPECT_NO_THROW(validate_session(s));
}

TEST(GenerateSession, SeparabilityGrowsWithAmplitude) {
  double prev = -1e300;
  for (double amp : {0.0, 0.5, 1.0, 2.0}) {
    SimConfig c;
    c.erp_amplitude = amp;
    c.seed = 17;
    c.n_repetitions = 4;
    const auto s = generate_session(c, random_targets(c, 6));
    const auto trials = filtered_trials(s, PipelineConfig{});
    const auto eps = episodes(s);
    const auto trained = train_pipeline(s, trials, eps, PipelineConfig{});
    double own = 0, wrong = 0;
    for (const auto& tr : trials) {
      const auto d = center_distances(trained.model, extended_covariance(tr, trained.prototype));
      const bool t = tr.label == ErpClass::Target;
      own += t ? d.d2_T : d.d2_NT;
      wrong += t ? d.d2_NT : d.d2_T;
    }
    const double sep = (wrong - own) / static_cast<double>(trials.size());
    EXPECT_GE(sep, prev) << "amplitude " << amp;
    prev = sep;
  }
}
