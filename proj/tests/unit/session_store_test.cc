#include "relcomp/session_store.h"

#include <gtest/gtest.h>

#include "json.hpp"
#include "relcomp/oracle.h"
#include "session_fixture.h"

namespace relcomp {
namespace {

using testing::ScratchDir;
using testing::Slurp;
using testing::Spit;

LoopConfig Config(PolicyKind policy = PolicyKind::kInfo, int budget = 12) {
  LoopConfig c;
  c.policy = policy;
  c.num_classes = 3;
  c.selection.budget = budget;
  c.selection.pool_factor = 5;
  c.selection.seed = 99;
  c.always_estimate_probs = true;
  return c;
}

struct Live {
  StoredSession stored;
  ActiveSession session;
  SimulatedOracle oracle;
};

// A session created the way the CLI and server create one: header on disk,
// then every answer logged before it is applied.
Live Start(const std::filesystem::path& dir, const LoopConfig& config) {
  DatasetRef ref = testing::WriteDataset(dir);
  PreparedData data = PrepareSessionData(ref);
  ActiveSession s = ActiveSession::StartWithBootstrapQueries(data.train.features, config);
  StoredSession stored{ref, 4, s.state()};
  SaveSession(dir, stored);
  return {stored, std::move(s), SimulatedOracle(*data.train.labels, 0.0, 1)};
}

void Answer1(Live& live, const std::filesystem::path& dir, bool save = true) {
  const Triplet t = *live.session.pending();
  const auto position = live.session.labeled().size();
  LabeledTriplet e{t, live.oracle.Respond(t, position), "simulated",
                   static_cast<std::int64_t>(position)};
  AppendAnswerLog(dir, e);
  live.session.Submit(e.answer, e.source, e.timestamp);
  live.stored.state = live.session.state();
  if (save) SaveSession(dir, live.stored);
}

TEST(SessionJson, RoundTripIsByteStable) {
  ScratchDir dir("store_roundtrip");
  Live live = Start(dir.path(), Config());
  for (int q = 0; q < 12; ++q) {
    const std::string text = SessionToJson(live.stored);
    EXPECT_EQ(SessionToJson(SessionFromJson(text)), text) << "after " << q << " answers";
    if (live.session.status() != SessionStatus::kAwaitingAnswer) break;
    Answer1(live, dir.path());
  }
  EXPECT_EQ(live.session.status(), SessionStatus::kDone);
  const std::string done = SessionToJson(live.stored);
  EXPECT_EQ(SessionToJson(SessionFromJson(done)), done);
}

TEST(SessionJson, SchemaMismatchIsExplicit) {
  ScratchDir dir("store_schema");
  Live live = Start(dir.path(), Config());
  auto j = nlohmann::json::parse(SessionToJson(live.stored));
  j["schema_version"] = kSessionSchemaVersion + 1;
  try {
    SessionFromJson(j.dump());
    FAIL() << "expected SessionFormatError";
  } catch (const SessionFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("schema version"), std::string::npos) << e.what();
  }
  j.erase("schema_version");
  EXPECT_THROW(SessionFromJson(j.dump()), SessionFormatError);
  EXPECT_THROW(SessionFromJson("[1, 2]"), SessionFormatError);
}

TEST(SaveLoad, NextQueryIdentical) {
  ScratchDir dir("store_saveload");
  Live live = Start(dir.path(), Config());
  for (int q = 0; q < 5; ++q) Answer1(live, dir.path());
  LoadedSession loaded = LoadSession(dir.path());
  EXPECT_EQ(loaded.replayed, 0);
  ASSERT_TRUE(loaded.session.pending().has_value());
  EXPECT_EQ(*loaded.session.pending(), *live.session.pending());
  EXPECT_EQ(SessionToJson(loaded.stored), SessionToJson(live.stored));
  // Both continue identically under the same answers.
  ScratchDir other("store_saveload_copy");
  while (live.session.status() == SessionStatus::kAwaitingAnswer) {
    const Triplet t = *live.session.pending();
    ASSERT_EQ(*loaded.session.pending(), t);
    const Answer a = live.oracle.Respond(t, live.session.labeled().size());
    live.session.Submit(a, "simulated", 0);
    loaded.session.Submit(a, "simulated", 0);
  }
  EXPECT_EQ(loaded.session.state().metric, live.session.state().metric);
}

TEST(SaveLoad, ReplaysAcknowledgedAnswersMissingFromHeader) {
  ScratchDir dir("store_replay");
  Live live = Start(dir.path(), Config());
  for (int q = 0; q < 4; ++q) Answer1(live, dir.path());
  const std::string header = Slurp(dir.path() / kSessionFile);
  // Two answers reach the log but the process dies before the header write.
  Answer1(live, dir.path(), false);
  Answer1(live, dir.path(), false);
  EXPECT_EQ(Slurp(dir.path() / kSessionFile), header);
  LoadedSession loaded = LoadSession(dir.path());
  EXPECT_EQ(loaded.replayed, 2);
  EXPECT_EQ(SessionToJson(loaded.stored), SessionToJson(live.stored));
  EXPECT_EQ(Slurp(dir.path() / kSessionFile), header);  // load never writes
}

TEST(SaveLoad, IgnoresUnterminatedFinalLogLine) {
  ScratchDir dir("store_partial");
  Live live = Start(dir.path(), Config());
  for (int q = 0; q < 3; ++q) Answer1(live, dir.path());
  std::string log = Slurp(dir.path() / kAnswerLogFile);
  Spit(dir.path() / kAnswerLogFile, log + "{\"i\":1,\"j\"");
  LoadedSession loaded = LoadSession(dir.path());
  EXPECT_EQ(loaded.replayed, 0);
  EXPECT_EQ(loaded.session.labeled().size(), 3u);
}

TEST(SaveLoad, TruncatedHeaderFailsAndIsLeftAlone) {
  ScratchDir dir("store_truncated");
  Live live = Start(dir.path(), Config());
  Answer1(live, dir.path());
  const std::string header = Slurp(dir.path() / kSessionFile);
  const std::string cut = header.substr(0, header.size() / 2);
  Spit(dir.path() / kSessionFile, cut);
  EXPECT_THROW(LoadSession(dir.path()), SessionFormatError);
  EXPECT_EQ(Slurp(dir.path() / kSessionFile), cut);
}

TEST(SaveLoad, RejectsInconsistentLog) {
  ScratchDir dir("store_badlog");
  Live live = Start(dir.path(), Config());
  for (int q = 0; q < 3; ++q) Answer1(live, dir.path());
  const std::string log = Slurp(dir.path() / kAnswerLogFile);
  // Drop the first line: the log no longer agrees with the header.
  Spit(dir.path() / kAnswerLogFile, log.substr(log.find('\n') + 1));
  EXPECT_THROW(LoadSession(dir.path()), SessionFormatError);
  // An extra line answering something other than the pending query.
  Triplet other = *live.session.pending();
  std::swap(other.j, other.k);
  Spit(dir.path() / kAnswerLogFile,
       log + LabeledTripletToJsonLine({other, Answer::kYes, "human", 1}) + "\n");
  EXPECT_THROW(LoadSession(dir.path()), SessionFormatError);
  Spit(dir.path() / kAnswerLogFile, log + "not json\n");
  EXPECT_THROW(LoadSession(dir.path()), SessionFormatError);
}

TEST(SaveLoad, DetectsChangedDataset) {
  ScratchDir dir("store_changed");
  Live live = Start(dir.path(), Config());
  Dataset d = LoadCsv(live.stored.dataset.path, {.label_column = "class"});
  d.features(0, 0) += 0.5;
  WriteCsv(d, live.stored.dataset.path);
  EXPECT_THROW(LoadSession(dir.path()), SessionFormatError);
}

TEST(SaveSession, WritesCompanionFiles) {
  ScratchDir dir("store_files");
  Live live = Start(dir.path(), Config());
  Answer1(live, dir.path());
  MetricWeights w = MetricFromJson(Slurp(dir.path() / kMetricFile));
  EXPECT_EQ(w.ToVector(), live.session.state().metric);
  const std::string history = Slurp(dir.path() / kHistoryFile);
  EXPECT_EQ(std::count(history.begin(), history.end(), '\n'),
            static_cast<long>(live.session.history().size()));
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "session.json.tmp"));
}

TEST(AnswerLogLine, Fields) {
  LabeledTriplet e{{3, 1, 4}, Answer::kNo, "human", 1700000000123};
  auto j = nlohmann::json::parse(LabeledTripletToJsonLine(e));
  EXPECT_EQ(j["i"], 3);
  EXPECT_EQ(j["j"], 1);
  EXPECT_EQ(j["k"], 4);
  EXPECT_EQ(j["answer"], "no");
  EXPECT_EQ(j["source"], "human");
  EXPECT_EQ(j["ts"], 1700000000123);
  EXPECT_EQ(LabeledTripletFromJsonLine(j.dump()), e);
  EXPECT_THROW(LabeledTripletFromJsonLine("{\"i\":1}"), SessionFormatError);
}

}  // namespace
}  // namespace relcomp
