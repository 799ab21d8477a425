#include "relcomp/active_session.h"

#include <stdexcept>

#include "relcomp/evaluation.h"
#include "relcomp/rng.h"

namespace relcomp {

void LoopConfig::Validate() const {
  selection.Validate();
  learner.Validate();
  if (num_classes < 1) throw std::invalid_argument("LoopConfig: num_classes must be >= 1");
  if (forest.num_trees < 1) throw std::invalid_argument("LoopConfig: num_trees must be >= 1");
  if (kmeans_max_iters < 1 || kmeans_restarts < 1)
    throw std::invalid_argument("LoopConfig: k-means iterations and restarts must be >= 1");
}

std::string_view ToString(SessionStatus status) {
  switch (status) {
    case SessionStatus::kAwaitingAnswer:
      return "awaiting_answer";
    case SessionStatus::kComputing:
      return "computing";
    case SessionStatus::kDone:
      return "done";
  }
  return "done";
}

SessionStatus ParseSessionStatus(std::string_view text) {
  if (text == "awaiting_answer") return SessionStatus::kAwaitingAnswer;
  if (text == "computing") return SessionStatus::kComputing;
  if (text == "done") return SessionStatus::kDone;
  throw std::invalid_argument("unknown session status '" + std::string(text) + "'");
}

ActiveSession::ActiveSession(FeatureMatrix train, SessionState state)
    : features_(std::move(train)), state_(std::move(state)) {
  const int n = static_cast<int>(features_.rows());
  if (n < 3) throw std::invalid_argument("ActiveSession: need at least 3 instances");
  if (state_.config.num_classes > n)
    throw std::invalid_argument("ActiveSession: more classes than instances");
  if (state_.metric.empty()) state_.metric.assign(features_.cols(), 1.0);
  if (static_cast<int>(state_.metric.size()) != features_.cols())
    throw std::invalid_argument("ActiveSession: metric dimension mismatch");
  if (state_.class_probs && state_.class_probs->rows() != n)
    throw std::invalid_argument("ActiveSession: class-probability row mismatch");
}

ActiveSession ActiveSession::StartWithBootstrapQueries(FeatureMatrix train,
                                                       const LoopConfig& config) {
  config.Validate();
  SessionState state;
  state.config = config;
  state.phase = SessionPhase::kBootstrap;
  ActiveSession s(std::move(train), std::move(state));
  if (config.always_estimate_probs) s.EstimateProbs();
  s.Advance();
  return s;
}

ActiveSession ActiveSession::StartWithInitial(FeatureMatrix train, const LoopConfig& config,
                                              const std::vector<LabeledTriplet>& initial) {
  config.Validate();
  SessionState state;
  state.config = config;
  state.phase = SessionPhase::kActive;
  for (const auto& e : initial) {
    if (!e.triplet.IsValid(static_cast<int>(train.rows())))
      throw std::invalid_argument("initial triplet outside the training data");
    state.labeled.Append(e);
  }
  state.initial_count = static_cast<int>(initial.size());
  ActiveSession s(std::move(train), std::move(state));
  s.Advance();
  return s;
}

ActiveSession ActiveSession::Restore(FeatureMatrix train, SessionState state) {
  state.config.Validate();
  if ((state.status == SessionStatus::kAwaitingAnswer) != state.pending.has_value())
    throw std::invalid_argument("session state: pending query iff awaiting_answer");
  return ActiveSession(std::move(train), std::move(state));
}

std::optional<ClassProbs> ActiveSession::class_probs() const {
  if (!state_.class_probs) return std::nullopt;
  return ClassProbs(*state_.class_probs);
}

void ActiveSession::Submit(Answer answer, const std::string& source,
                           std::int64_t timestamp) {
  if (state_.status != SessionStatus::kAwaitingAnswer || !state_.pending)
    throw std::logic_error("no query is pending");
  const Triplet t = *state_.pending;
  state_.labeled.Append({t, answer, source, timestamp});
  state_.history.back().answer = answer;
  if (state_.pool_ready) state_.pool.Remove(t);
  ++state_.budget_used;
  state_.pending.reset();
  state_.status = SessionStatus::kComputing;
  Advance();
}

void ActiveSession::Relearn() {
  std::vector<Constraint> constraints = ConstraintsFrom(state_.labeled);
  std::span<const double> warm(state_.duals.data(),
                               std::min(state_.duals.size(), constraints.size()));
  LearnResult result = LearnMetric(features_, constraints, state_.config.learner, warm);
  state_.metric = result.weights.ToVector();
  state_.duals = std::move(result.duals);
}

void ActiveSession::EstimateProbs() {
  const auto step = static_cast<std::uint64_t>(state_.labeled.size());
  const std::uint64_t seed = state_.config.selection.seed;
  MetricWeights w(state_.metric);
  KMeansParams km;
  km.num_clusters = state_.config.num_classes;
  km.max_iters = state_.config.kmeans_max_iters;
  km.restarts = state_.config.kmeans_restarts;
  km.seed = DeriveSeed(seed, kStreamKMeans, step);
  Clustering clusters = KMeans(features_, w, km);

  ForestParams fp = state_.config.forest;
  fp.seed = DeriveSeed(seed, kStreamForest, step);
  ClassProbs probs = EstimateClassProbs(RescaleFeatures(features_, w), clusters.assignments,
                                        state_.config.num_classes, fp);
  state_.class_probs = probs.matrix();
}

void ActiveSession::EnterActivePhase() {
  const int n = static_cast<int>(features_.rows());
  const auto& sel = state_.config.selection;
  state_.pool = state_.config.policy == PolicyKind::kInfoExact
                    ? ExhaustivePool(n, state_.labeled, sel.epsilon_report)
                    : SamplePool(n, sel, state_.labeled);
  state_.pool_ready = true;
}

Triplet ActiveSession::DrawBootstrapTriplet() {
  const int n = static_cast<int>(features_.rows());
  Rng rng(DeriveSeed(state_.config.selection.seed, kStreamBootstrap,
                     static_cast<std::uint64_t>(state_.bootstrap_draws++)));
  while (true) {
    Triplet t;
    t.i = static_cast<int>(UniformIndex(rng, n));
    do t.j = static_cast<int>(UniformIndex(rng, n)); while (t.j == t.i);
    do t.k = static_cast<int>(UniformIndex(rng, n)); while (t.k == t.i || t.k == t.j);
    if (!state_.labeled.Contains(t)) return t;
  }
}

void ActiveSession::Advance() {
  const auto& config = state_.config;
  if (state_.phase == SessionPhase::kBootstrap) {
    if (state_.labeled.CountYesNo() >= 2) {
      state_.phase = SessionPhase::kActive;
    } else if (state_.budget_used >= config.selection.budget ||
               state_.labeled.size() >= TripletCount(static_cast<int>(features_.rows()))) {
      Relearn();
      state_.status = SessionStatus::kDone;
      return;
    } else {
      Triplet t = DrawBootstrapTriplet();
      state_.pending = t;
      state_.history.push_back({t, std::nullopt, std::nullopt, true, state_.metric});
      state_.status = SessionStatus::kAwaitingAnswer;
      return;
    }
  }

  if (!state_.pool_ready) EnterActivePhase();
  Relearn();
  if (state_.budget_used >= config.selection.budget || state_.pool.empty()) {
    state_.status = SessionStatus::kDone;
    return;
  }

  if (UsesInfoGain(config.policy) || config.always_estimate_probs) EstimateProbs();

  Triplet next;
  std::optional<double> score;
  if (UsesInfoGain(config.policy)) {
    ClassProbs probs(*state_.class_probs);
    std::vector<double> scores = ScorePool(state_.pool, probs);
    Selection sel = SelectFromScores(state_.pool, scores);
    next = sel.triplet;
    score = sel.score;
    if (config.trace_scores) last_scores_ = std::move(scores);
  } else {
    Rng rng(DeriveSeed(config.selection.seed, kStreamBaseline,
                       static_cast<std::uint64_t>(state_.labeled.size())));
    next = BaselineNext(config.policy, state_.pool, state_.labeled, rng);
  }
  state_.pending = next;
  state_.history.push_back({next, std::nullopt, score, false, state_.metric});
  state_.status = SessionStatus::kAwaitingAnswer;
}

LoopResult RunActiveLoop(const FeatureMatrix& train, const LoopConfig& config,
                         Oracle& oracle, const std::vector<LabeledTriplet>& initial,
                         const std::function<void(const ActiveSession&)>& on_answer) {
  ActiveSession session = initial.empty()
                              ? ActiveSession::StartWithBootstrapQueries(train, config)
                              : ActiveSession::StartWithInitial(train, config, initial);
  while (session.status() == SessionStatus::kAwaitingAnswer) {
    const auto position = static_cast<std::uint64_t>(session.labeled().size());
    std::optional<Answer> answer = oracle.Ask(*session.pending(), position);
    if (!answer) return {std::move(session), true};
    session.Submit(*answer, oracle.source(), oracle.timestamp(position));
    if (on_answer) on_answer(session);
  }
  return {std::move(session), false};
}

}  // namespace relcomp
