#include "relcomp/session_store.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

namespace relcomp {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json TripletJson(const Triplet& t) { return json::array({t.i, t.j, t.k}); }

Triplet TripletFrom(const json& j) {
  if (!j.is_array() || j.size() != 3) throw SessionFormatError("triplet must be [i, j, k]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

json EntryJson(const LabeledTriplet& e) {
  return {{"i", e.triplet.i},
          {"j", e.triplet.j},
          {"k", e.triplet.k},
          {"answer", ToString(e.answer)},
          {"source", e.source},
          {"ts", e.timestamp}};
}

LabeledTriplet EntryFrom(const json& j) {
  LabeledTriplet e;
  e.triplet = {j.at("i").get<int>(), j.at("j").get<int>(), j.at("k").get<int>()};
  e.answer = ParseAnswer(j.at("answer").get<std::string>());
  e.source = j.at("source").get<std::string>();
  e.timestamp = j.at("ts").get<std::int64_t>();
  return e;
}

json ConfigJson(const LoopConfig& c) {
  return {{"policy", ToString(c.policy)},
          {"num_classes", c.num_classes},
          {"selection",
           {{"pool_factor", c.selection.pool_factor},
            {"epsilon_report", c.selection.epsilon_report},
            {"budget", c.selection.budget},
            {"seed", c.selection.seed}}},
          {"learner",
           {{"slack_tradeoff", c.learner.slack_tradeoff},
            {"margin", c.learner.margin},
            {"max_iters", c.learner.max_iters},
            {"tolerance", c.learner.tolerance}}},
          {"forest",
           {{"num_trees", c.forest.num_trees},
            {"max_depth", c.forest.max_depth},
            {"min_leaf", c.forest.min_leaf},
            {"features_per_split", c.forest.features_per_split}}},
          {"kmeans_max_iters", c.kmeans_max_iters},
          {"kmeans_restarts", c.kmeans_restarts},
          {"always_estimate_probs", c.always_estimate_probs},
          {"trace_scores", c.trace_scores}};
}

LoopConfig ConfigFrom(const json& j) {
  LoopConfig c;
  c.policy = ParsePolicy(j.at("policy").get<std::string>());
  c.num_classes = j.at("num_classes").get<int>();
  const json& s = j.at("selection");
  c.selection.pool_factor = s.at("pool_factor").get<int>();
  c.selection.epsilon_report = s.at("epsilon_report").get<double>();
  c.selection.budget = s.at("budget").get<int>();
  c.selection.seed = s.at("seed").get<std::uint64_t>();
  const json& l = j.at("learner");
  c.learner.slack_tradeoff = l.at("slack_tradeoff").get<double>();
  c.learner.margin = l.at("margin").get<double>();
  c.learner.max_iters = l.at("max_iters").get<int>();
  c.learner.tolerance = l.at("tolerance").get<double>();
  const json& f = j.at("forest");
  c.forest.num_trees = f.at("num_trees").get<int>();
  c.forest.max_depth = f.at("max_depth").get<int>();
  c.forest.min_leaf = f.at("min_leaf").get<int>();
  c.forest.features_per_split = f.at("features_per_split").get<int>();
  c.kmeans_max_iters = j.at("kmeans_max_iters").get<int>();
  c.kmeans_restarts = j.at("kmeans_restarts").get<int>();
  c.always_estimate_probs = j.at("always_estimate_probs").get<bool>();
  c.trace_scores = j.at("trace_scores").get<bool>();
  return c;
}

json StateJson(const SessionState& s) {
  json state;
  state["phase"] = s.phase == SessionPhase::kBootstrap ? "bootstrap" : "active";
  state["status"] = ToString(s.status);
  state["initial_count"] = s.initial_count;
  state["budget_used"] = s.budget_used;
  state["bootstrap_draws"] = s.bootstrap_draws;
  state["pool_ready"] = s.pool_ready;
  json cands = json::array();
  for (const auto& t : s.pool.candidates) cands.push_back(TripletJson(t));
  state["pool"] = {{"origin", s.pool.origin == PoolOrigin::kSampled ? "sampled" : "exhaustive"},
                   {"near_optimal_probability", s.pool.near_optimal_probability},
                   {"candidates", std::move(cands)}};
  state["metric"] = s.metric;
  state["duals"] = s.duals;
  if (s.class_probs) {
    json rows = json::array();
    for (Eigen::Index h = 0; h < s.class_probs->rows(); ++h) {
      json row = json::array();
      for (Eigen::Index c = 0; c < s.class_probs->cols(); ++c) row.push_back((*s.class_probs)(h, c));
      rows.push_back(std::move(row));
    }
    state["class_probs"] = std::move(rows);
  } else {
    state["class_probs"] = nullptr;
  }
  state["pending"] = s.pending ? TripletJson(*s.pending) : json(nullptr);
  json labeled = json::array();
  for (const auto& e : s.labeled.entries()) labeled.push_back(EntryJson(e));
  state["labeled"] = std::move(labeled);
  json history = json::array();
  for (const auto& rec : s.history) {
    history.push_back({{"query", TripletJson(rec.query)},
                       {"answer", rec.answer ? json(ToString(*rec.answer)) : json(nullptr)},
                       {"score", rec.score ? json(*rec.score) : json(nullptr)},
                       {"bootstrap", rec.bootstrap},
                       {"metric", rec.metric}});
  }
  state["history"] = std::move(history);
  return state;
}

SessionState StateFrom(const json& j, LoopConfig config) {
  SessionState s;
  s.config = std::move(config);
  const std::string phase = j.at("phase").get<std::string>();
  if (phase != "bootstrap" && phase != "active") throw SessionFormatError("unknown phase");
  s.phase = phase == "bootstrap" ? SessionPhase::kBootstrap : SessionPhase::kActive;
  s.status = ParseSessionStatus(j.at("status").get<std::string>());
  s.initial_count = j.at("initial_count").get<int>();
  s.budget_used = j.at("budget_used").get<int>();
  s.bootstrap_draws = j.at("bootstrap_draws").get<int>();
  s.pool_ready = j.at("pool_ready").get<bool>();
  const json& pool = j.at("pool");
  s.pool.origin = pool.at("origin").get<std::string>() == "sampled" ? PoolOrigin::kSampled
                                                                    : PoolOrigin::kExhaustive;
  s.pool.near_optimal_probability = pool.at("near_optimal_probability").get<double>();
  for (const auto& t : pool.at("candidates")) s.pool.candidates.push_back(TripletFrom(t));
  s.metric = j.at("metric").get<std::vector<double>>();
  s.duals = j.at("duals").get<std::vector<double>>();
  const json& cp = j.at("class_probs");
  if (!cp.is_null()) {
    const auto rows = static_cast<Eigen::Index>(cp.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(cp[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index h = 0; h < rows; ++h) {
      if (static_cast<Eigen::Index>(cp[h].size()) != cols)
        throw SessionFormatError("ragged class_probs");
      for (Eigen::Index c = 0; c < cols; ++c) m(h, c) = cp[h][c].get<double>();
    }
    s.class_probs = std::move(m);
  }
  if (!j.at("pending").is_null()) s.pending = TripletFrom(j.at("pending"));
  for (const auto& e : j.at("labeled")) s.labeled.Append(EntryFrom(e));
  for (const auto& h : j.at("history")) {
    IterationRecord rec;
    rec.query = TripletFrom(h.at("query"));
    if (!h.at("answer").is_null()) rec.answer = ParseAnswer(h.at("answer").get<std::string>());
    if (!h.at("score").is_null()) rec.score = h.at("score").get<double>();
    rec.bootstrap = h.at("bootstrap").get<bool>();
    rec.metric = h.at("metric").get<std::vector<double>>();
    s.history.push_back(std::move(rec));
  }
  return s;
}

void WriteFileAtomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    ok = std::fflush(f) == 0 && ok;
    ok = ::fsync(fileno(f)) == 0 && ok;
    ok = std::fclose(f) == 0 && ok;
    if (!ok) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SessionFormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

std::string SessionToJson(const StoredSession& session) {
  json root;
  root["schema_version"] = kSessionSchemaVersion;
  root["master_seed"] = session.master_seed;
  const DatasetRef& d = session.dataset;
  root["dataset"] = {{"path", d.path},
                     {"label_column", d.label_column},
                     {"test_fraction", d.test_fraction},
                     {"split_seed", d.split_seed},
                     {"standardize", d.standardize},
                     {"fingerprint", d.fingerprint}};
  root["config"] = ConfigJson(session.state.config);
  root["state"] = StateJson(session.state);
  return root.dump() + "\n";
}

StoredSession SessionFromJson(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw SessionFormatError(std::string("session file is not valid JSON: ") + e.what());
  }
  try {
    if (!root.is_object() || !root.contains("schema_version"))
      throw SessionFormatError("session file has no schema_version");
    const int version = root.at("schema_version").get<int>();
    if (version != kSessionSchemaVersion)
      throw SessionFormatError("unsupported session schema version " + std::to_string(version) +
                               " (expected " + std::to_string(kSessionSchemaVersion) + ")");
    StoredSession out;
    out.master_seed = root.at("master_seed").get<std::uint64_t>();
    const json& d = root.at("dataset");
    out.dataset.path = d.at("path").get<std::string>();
    out.dataset.label_column = d.at("label_column").get<std::string>();
    out.dataset.test_fraction = d.at("test_fraction").get<double>();
    out.dataset.split_seed = d.at("split_seed").get<std::uint64_t>();
    out.dataset.standardize = d.at("standardize").get<bool>();
    out.dataset.fingerprint = d.at("fingerprint").get<std::uint64_t>();
    out.state = StateFrom(root.at("state"), ConfigFrom(root.at("config")));
    return out;
  } catch (const SessionFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw SessionFormatError(std::string("malformed session file: ") + e.what());
  }
}

std::string LabeledTripletToJsonLine(const LabeledTriplet& entry) {
  return EntryJson(entry).dump();
}

LabeledTriplet LabeledTripletFromJsonLine(const std::string& line) {
  try {
    return EntryFrom(json::parse(line));
  } catch (const std::exception& e) {
    throw SessionFormatError(std::string("malformed answer log line: ") + e.what());
  }
}

std::string MetricToJson(const MetricWeights& w) {
  return json{{"weights", w.ToVector()}}.dump() + "\n";
}

MetricWeights MetricFromJson(const std::string& text) {
  try {
    return MetricWeights(json::parse(text).at("weights").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw SessionFormatError(std::string("malformed metric file: ") + e.what());
  }
}

void SaveSession(const fs::path& dir, const StoredSession& session) {
  fs::create_directories(dir);
  WriteFileAtomic(dir / kSessionFile, SessionToJson(session));
  std::string history;
  const auto& recs = session.state.history;
  for (std::size_t q = 0; q < recs.size(); ++q) {
    json line = {{"query_id", q},
                 {"i", recs[q].query.i},
                 {"j", recs[q].query.j},
                 {"k", recs[q].query.k},
                 {"answer", recs[q].answer ? json(ToString(*recs[q].answer)) : json(nullptr)},
                 {"score", recs[q].score ? json(*recs[q].score) : json(nullptr)},
                 {"bootstrap", recs[q].bootstrap},
                 {"metric", recs[q].metric}};
    history += line.dump() + "\n";
  }
  WriteFileAtomic(dir / kHistoryFile, history);
  WriteFileAtomic(dir / kMetricFile, MetricToJson(MetricWeights(session.state.metric)));
}

void AppendAnswerLog(const fs::path& dir, const LabeledTriplet& entry) {
  fs::create_directories(dir);
  const fs::path path = dir / kAnswerLogFile;
  std::FILE* f = std::fopen(path.c_str(), "ab");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  const std::string line = LabeledTripletToJsonLine(entry) + "\n";
  bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size();
  ok = std::fflush(f) == 0 && ok;
  ok = ::fsync(fileno(f)) == 0 && ok;
  ok = std::fclose(f) == 0 && ok;
  if (!ok) throw std::runtime_error("failed to persist answer to " + path.string());
}

std::vector<LabeledTriplet> ReadAnswerLog(const fs::path& dir) {
  const fs::path path = dir / kAnswerLogFile;
  std::vector<LabeledTriplet> out;
  if (!fs::exists(path)) return out;
  const std::string text = ReadFile(path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    // A final line without its newline was never acknowledged.
    if (end == std::string::npos) break;
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    out.push_back(LabeledTripletFromJsonLine(line));
  }
  return out;
}

PreparedData PrepareSessionData(const DatasetRef& ref) {
  CsvOptions options;
  if (!ref.label_column.empty()) options.label_column = ref.label_column;
  Dataset ds = LoadCsv(ref.path, options);
  PreparedData data = PrepareData(ds, ref.test_fraction, ref.split_seed, ref.standardize);
  if (ref.fingerprint != 0 && FeatureFingerprint(data.train.features) != ref.fingerprint)
    throw SessionFormatError("dataset " + ref.path + " changed since the session was created");
  return data;
}

LoadedSession LoadSession(const fs::path& dir) {
  StoredSession stored = SessionFromJson(ReadFile(dir / kSessionFile));
  PreparedData data = PrepareSessionData(stored.dataset);
  ActiveSession session = ActiveSession::Restore(data.train.features, stored.state);

  std::vector<LabeledTriplet> log = ReadAnswerLog(dir);
  const auto& known = session.labeled().entries();
  if (log.size() < known.size())
    throw SessionFormatError("answer log is shorter than the session state");
  for (std::size_t p = 0; p < known.size(); ++p)
    if (!(log[p] == known[p]))
      throw SessionFormatError("answer log disagrees with the session state at line " +
                               std::to_string(p + 1));
  int replayed = 0;
  for (std::size_t p = known.size(); p < log.size(); ++p) {
    const auto& pending = session.pending();
    if (!pending || *pending != log[p].triplet)
      throw SessionFormatError("answer log line " + std::to_string(p + 1) +
                               " does not answer the pending query");
    session.Submit(log[p].answer, log[p].source, log[p].timestamp);
    ++replayed;
  }
  stored.state = session.state();
  return {std::move(stored), std::move(session), std::move(data), replayed};
}

}  // namespace relcomp
