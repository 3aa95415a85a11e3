#include "asap/eval.hpp"
#include "asap/model_io.hpp"
#include "asap/session.hpp"
#include "asap/sim.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

using namespace asap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("asap_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

SessionRecord small_session(FlashMode mode = FlashMode::RowColumn) {
  SimConfig c;
  c.n_repetitions = 2;
  c.flash_mode = mode;
  c.seed = 3;
  return generate_session(c, random_targets(c, 4));
}

}  // namespace

TEST(SessionFormat, RoundTripWithinFloat32) {
  const auto s = small_session();
  const auto dir = scratch("rt");
  write_session(s, dir);
  EXPECT_EQ(fs::file_size(dir / "signal.f32le"), static_cast<std::uintmax_t>(4 * s.recording.samples.size()));

  const auto r = read_session(dir);
  EXPECT_EQ(r.dataset_id, s.dataset_id);
  EXPECT_EQ(r.channel_names, s.channel_names);
  EXPECT_EQ(r.L, 36);
  EXPECT_EQ(r.flashes_per_repetition, s.flashes_per_repetition);
  ASSERT_EQ(r.recording.samples.rows(), s.recording.samples.rows());
  ASSERT_EQ(r.recording.samples.cols(), s.recording.samples.cols());
  EXPECT_EQ(r.recording.samples, s.recording.samples.cast<float>().cast<double>());
  ASSERT_EQ(r.events.size(), s.events.size());
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    EXPECT_EQ(r.events[i].onset, s.events[i].onset);
    EXPECT_EQ(r.events[i].flashed, s.events[i].flashed);
    EXPECT_EQ(r.events[i].is_target, s.events[i].is_target);
    EXPECT_EQ(r.events[i].episode_id, s.events[i].episode_id);
  }
  const auto eps = episodes(r);
  ASSERT_EQ(eps.size(), 4u);
  for (const auto& ep : eps) EXPECT_EQ(ep.size(), 24u);
  fs::remove_all(dir);
}

TEST(SessionFormat, MetadataKeys) {
  const auto j = session_metadata(small_session());
  for (const char* key : {"dataset_id", "subject_id", "session_id", "fs_hz", "n_channels", "channel_names", "L",
                          "grid_rows", "grid_cols", "soa_ms", "n_samples", "epoch_seconds"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(SessionFormat, WrongSignalSizeNamesTheFile) {
  const auto dir = scratch("corrupt");
  write_session(small_session(), dir);
  fs::resize_file(dir / "signal.f32le", fs::file_size(dir / "signal.f32le") - 3);
  try {
    read_session(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
    EXPECT_NE(std::string(e.what()).find("signal.f32le"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(SessionFormat, UnlabelledEventsParse) {
  const auto evs = detail::events_from_csv(
      "onset_sample,episode_id,flashed_characters,is_target\n10,0,3|1|2,NA\n20,0,4,1\n", "events.csv");
  ASSERT_EQ(evs.size(), 2u);
  EXPECT_EQ(evs[0].flashed, (std::vector<int>{1, 2, 3}));
  EXPECT_FALSE(evs[0].is_target.has_value());
  EXPECT_TRUE(*evs[1].is_target);
  EXPECT_THROW(detail::events_from_csv("bad header\n", "events.csv"), Error);
  EXPECT_THROW(detail::events_from_csv("onset_sample,episode_id,flashed_characters,is_target\n1,0,x,1\n", "e"), Error);
}

TEST(SessionFormat, NonContiguousEpisodesRejected) {
  auto s = small_session();
  std::swap(s.events[0].episode_id, s.events[30].episode_id);
  EXPECT_THROW(episodes(s), Error);
}

TEST(SessionFormat, InfersRepetitionLength) {
  auto rc = small_session();
  rc.flashes_per_repetition.reset();
  EXPECT_EQ(flashes_per_repetition(rc), 12);
  auto pr = small_session(FlashMode::PseudoRandom);
  pr.flashes_per_repetition.reset();
  EXPECT_EQ(flashes_per_repetition(pr), 6);
}

TEST(SessionFormat, TargetInference) {
  const auto s = small_session();
  for (const auto& ep : episodes(s)) {
    ASSERT_TRUE(ep.target.has_value());
    for (std::size_t i = ep.begin; i < ep.end; ++i) EXPECT_EQ(s.events[i].contains(*ep.target), *s.events[i].is_target);
  }
}

TEST(ModelFormat, RoundTripIsExact) {
  SimConfig c;
  c.n_repetitions = 2;
  const auto s = generate_session(c, random_targets(c, 7));
  PipelineConfig cfg;
  const auto trained = train_on_session(s, cfg);
  const std::string bytes = serialize_model(trained);
  EXPECT_EQ(bytes.rfind("ASAPMODEL/1\n", 0), 0u);
  const auto back = deserialize_model(bytes);
  EXPECT_EQ(back.model.center_T, trained.model.center_T);
  EXPECT_EQ(back.model.center_NT, trained.model.center_NT);
  EXPECT_EQ(back.model.sigma_T, trained.model.sigma_T);
  EXPECT_EQ(back.model.sigma_NT, trained.model.sigma_NT);
  EXPECT_EQ(back.prototype.P, trained.prototype.P);

  const auto path = scratch("model") / "m.asapmodel";
  save_model(trained, path);
  EXPECT_EQ(load_model(path).model.center_T, trained.model.center_T);
  fs::remove_all(path.parent_path());
}

TEST(ModelFormat, RejectsCorruption) {
  SimConfig c;
  c.n_repetitions = 1;
  const auto trained = train_on_session(generate_session(c, random_targets(c, 6)), PipelineConfig{});
  std::string bytes = serialize_model(trained);
  EXPECT_THROW(deserialize_model("ASAPMODEL/2\n{}\n"), Error);
  EXPECT_THROW(deserialize_model(bytes.substr(0, bytes.size() - 8)), Error);
}
