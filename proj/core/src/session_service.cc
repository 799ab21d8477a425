#include "relcomp/session_service.h"

#include <chrono>

#include "json.hpp"
#include "relcomp/rng.h"

namespace relcomp {
namespace {

using nlohmann::json;

ServiceResponse Error(int status, const std::string& code, const std::string& message) {
  return {status, json{{"error", code}, {"message", message}}.dump()};
}

std::int64_t WallClockMillis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

SessionService::SessionService(LoadedSession loaded, std::filesystem::path dir)
    : loaded_(std::move(loaded)), dir_(std::move(dir)) {
  Publish(false);
}

std::unique_ptr<SessionService> SessionService::Create(PreparedData data, DatasetRef ref,
                                                       std::uint64_t master_seed,
                                                       const LoopConfig& config,
                                                       std::filesystem::path dir) {
  if (std::filesystem::exists(dir / kSessionFile))
    throw std::runtime_error("a session already exists in " + dir.string());
  LoopConfig lc = config;
  lc.selection.seed = DeriveSeed(master_seed, kStreamLoop, 0);
  ref.fingerprint = FeatureFingerprint(data.train.features);
  ActiveSession session = ActiveSession::StartWithBootstrapQueries(data.train.features, lc);
  StoredSession stored{std::move(ref), master_seed, session.state()};
  SaveSession(dir, stored);
  LoadedSession loaded{std::move(stored), std::move(session), std::move(data), 0};
  return std::make_unique<SessionService>(std::move(loaded), std::move(dir));
}

std::shared_ptr<const SessionService::Snapshot> SessionService::snapshot() const {
  std::lock_guard<std::mutex> lock(snapshot_mutex_);
  return snapshot_;
}

std::string SessionService::BuildProgress(bool computing) const {
  const ActiveSession& s = loaded_.session;
  json j;
  j["status"] = computing ? std::string("computing") : std::string(ToString(s.status()));
  j["phase"] = s.state().phase == SessionPhase::kBootstrap ? "bootstrap" : "active";
  j["budget"] = s.budget();
  j["budget_used"] = s.budget_used();
  j["remaining"] = s.remaining();
  j["labeled"] = s.labeled().size();
  j["yes_no"] = s.labeled().CountYesNo();
  j["query_id"] = !computing && s.pending() ? json(s.query_id()) : json(nullptr);
  return j.dump();
}

std::string SessionService::BuildQueryPayload() const {
  const ActiveSession& s = loaded_.session;
  if (!s.pending()) return {};
  const Triplet t = *s.pending();
  const Dataset& train = loaded_.data.train;
  std::optional<ClassProbs> probs = s.class_probs();
  json instances = json::array();
  const std::pair<const char*, int> roles[] = {{"anchor", t.i}, {"a", t.j}, {"b", t.k}};
  for (const auto& [role, h] : roles) {
    json inst;
    inst["role"] = role;
    inst["index"] = h;
    inst["id"] = train.ids[h];
    std::vector<double> f(train.features.row(h).begin(), train.features.row(h).end());
    inst["features"] = std::move(f);
    if (probs) {
      std::vector<double> row(probs->num_classes());
      for (int c = 0; c < probs->num_classes(); ++c) row[c] = (*probs)(h, c);
      inst["class_probs"] = std::move(row);
    } else {
      inst["class_probs"] = nullptr;
    }
    instances.push_back(std::move(inst));
  }
  json j;
  j["status"] = "awaiting_answer";
  j["query_id"] = s.query_id();
  j["triplet"] = {{"i", t.i}, {"j", t.j}, {"k", t.k}};
  j["instances"] = std::move(instances);
  j["feature_names"] = train.feature_names;
  j["bootstrap"] = s.history().back().bootstrap;
  j["budget"] = s.budget();
  j["budget_used"] = s.budget_used();
  j["remaining"] = s.remaining();
  return j.dump();
}

void SessionService::Publish(bool computing) {
  const ActiveSession& s = loaded_.session;
  auto snap = std::make_shared<Snapshot>();
  snap->progress = BuildProgress(computing);
  snap->status = computing ? "computing" : std::string(ToString(s.status()));
  if (!computing) snap->query = BuildQueryPayload();
  snap->metric =
      json{{"weights", s.metric().ToVector()}, {"feature_names", loaded_.data.train.feature_names}}
          .dump();
  json entries = json::array();
  const auto& history = s.history();
  const auto& labeled = s.labeled().entries();
  // history and the labeled set line up after the free initial entries.
  const std::size_t offset = static_cast<std::size_t>(s.state().initial_count);
  for (std::size_t q = 0; q < history.size(); ++q) {
    const IterationRecord& rec = history[q];
    if (!rec.answer) continue;
    const LabeledTriplet& e = labeled[offset + q];
    entries.push_back({{"query_id", q},
                       {"i", rec.query.i},
                       {"j", rec.query.j},
                       {"k", rec.query.k},
                       {"answer", ToString(*rec.answer)},
                       {"score", rec.score ? json(*rec.score) : json(nullptr)},
                       {"bootstrap", rec.bootstrap},
                       {"source", e.source},
                       {"ts", e.timestamp}});
  }
  snap->history = json{{"budget_used", s.budget_used()}, {"entries", std::move(entries)}}.dump();
  std::lock_guard<std::mutex> lock(snapshot_mutex_);
  snapshot_ = std::move(snap);
}

ServiceResponse SessionService::GetStatus() const { return {200, snapshot()->progress}; }

ServiceResponse SessionService::GetQuery() const {
  auto snap = snapshot();
  if (snap->status == "computing")
    return {503, json{{"status", "computing"}, {"retry_after_ms", 250}}.dump()};
  if (snap->status == "done")
    return {410, json{{"status", "done"}, {"progress", json::parse(snap->progress)}}.dump()};
  return {200, snap->query};
}

ServiceResponse SessionService::GetMetric() const { return {200, snapshot()->metric}; }

ServiceResponse SessionService::GetHistory() const { return {200, snapshot()->history}; }

ServiceResponse SessionService::PostAnswer(std::string_view body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return Error(400, "bad_request", "body is not valid JSON");
  }
  if (!req.is_object() || !req.contains("answer") || !req["answer"].is_string())
    return Error(400, "bad_request", "expected {\"answer\": \"yes\"|\"no\"|\"dk\"}");
  Answer answer;
  try {
    answer = ParseAnswer(req["answer"].get<std::string>());
  } catch (const std::exception&) {
    return Error(400, "bad_request", "answer must be yes, no or dk");
  }

  std::unique_lock<std::mutex> lock(writer_, std::try_to_lock);
  if (!lock.owns_lock()) return Error(503, "computing", "an answer is being processed");

  ActiveSession& s = loaded_.session;
  if (s.status() == SessionStatus::kDone)
    return Error(409, "session_complete", "the query budget is spent");
  if (req.contains("query_id")) {
    if (!req["query_id"].is_number_integer())
      return Error(400, "bad_request", "query_id must be an integer");
    if (req["query_id"].get<int>() != s.query_id())
      return Error(409, "stale_query", "query " + std::to_string(req["query_id"].get<int>()) +
                                           " is not pending");
  }

  const LabeledTriplet entry{*s.pending(), answer, "human", WallClockMillis()};
  try {
    AppendAnswerLog(dir_, entry);
  } catch (const std::exception& e) {
    return Error(500, "storage", e.what());
  }
  Publish(true);
  if (compute_observer_) compute_observer_();
  try {
    s.Submit(entry.answer, entry.source, entry.timestamp);
    loaded_.stored.state = s.state();
    SaveSession(dir_, loaded_.stored);
  } catch (const std::exception& e) {
    Publish(false);
    return Error(500, "internal", e.what());
  }
  Publish(false);
  return {200, json{{"ok", true}, {"progress", json::parse(snapshot()->progress)}}.dump()};
}

}  // namespace relcomp
