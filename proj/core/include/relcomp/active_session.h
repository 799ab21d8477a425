#ifndef RELCOMP_ACTIVE_SESSION_H_
#define RELCOMP_ACTIVE_SESSION_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relcomp/forest.h"
#include "relcomp/kmeans.h"
#include "relcomp/metric.h"
#include "relcomp/oracle.h"
#include "relcomp/policy.h"
#include "relcomp/pool.h"
#include "relcomp/triplet.h"
#include "relcomp/types.h"

namespace relcomp {

struct LoopConfig {
  PolicyKind policy = PolicyKind::kInfo;
  int num_classes = 2;
  SelectionParams selection;
  LearnerParams learner;
  ForestParams forest;  // seed is derived per iteration
  int kmeans_max_iters = 100;
  int kmeans_restarts = 5;
  // Compute class probabilities even when the policy does not need them
  // (for display in the labeling UI).
  bool always_estimate_probs = false;
  // Keep the full pool score vector of the latest selection.
  bool trace_scores = false;

  void Validate() const;
};

enum class SessionStatus { kAwaitingAnswer, kComputing, kDone };
std::string_view ToString(SessionStatus status);
SessionStatus ParseSessionStatus(std::string_view text);

// kBootstrap: random queries until two yes/no answers exist; every answer
// in this phase counts against the budget. kActive: policy-driven queries.
enum class SessionPhase { kBootstrap, kActive };

struct IterationRecord {
  Triplet query;
  std::optional<Answer> answer;
  std::optional<double> score;  // info gain, for info policies
  bool bootstrap = false;
  // Metric in force when the query was chosen.
  std::vector<double> metric;
};

// Everything needed to continue a session bit-for-bit.
struct SessionState {
  LoopConfig config;
  SessionPhase phase = SessionPhase::kActive;
  SessionStatus status = SessionStatus::kComputing;
  LabeledTripletSet labeled;
  // Entries of `labeled` that were obtained for free before the loop.
  int initial_count = 0;
  int budget_used = 0;
  int bootstrap_draws = 0;
  bool pool_ready = false;
  Pool pool;
  std::vector<double> metric;
  std::vector<double> duals;  // aligned with ConstraintsFrom(labeled)
  std::optional<Eigen::MatrixXd> class_probs;
  std::optional<Triplet> pending;
  std::vector<IterationRecord> history;
};

// The active learning loop as an explicit state machine so that a human
// oracle can answer asynchronously: each Submit() records the answer,
// relearns the metric (warm-started from the previous duals), re-estimates
// class probabilities through k-means and a random forest when needed, and
// picks the next query.
class ActiveSession {
 public:
  // Session whose first queries are random bootstrap triplets answered by
  // the same (counted) oracle.
  static ActiveSession StartWithBootstrapQueries(FeatureMatrix train,
                                                 const LoopConfig& config);
  // Session seeded with triplets labeled outside the budget.
  static ActiveSession StartWithInitial(FeatureMatrix train, const LoopConfig& config,
                                        const std::vector<LabeledTriplet>& initial);
  // Continues from a saved state. The features must match the session's.
  static ActiveSession Restore(FeatureMatrix train, SessionState state);

  SessionStatus status() const { return state_.status; }
  const std::optional<Triplet>& pending() const { return state_.pending; }
  int budget_used() const { return state_.budget_used; }
  int budget() const { return state_.config.selection.budget; }
  int remaining() const { return budget() - budget_used(); }
  // Sequence number of the pending query (index into history).
  int query_id() const { return static_cast<int>(state_.history.size()) - 1; }

  // Throws std::logic_error unless a query is pending.
  void Submit(Answer answer, const std::string& source, std::int64_t timestamp);

  const SessionState& state() const { return state_; }
  const FeatureMatrix& features() const { return features_; }
  const LabeledTripletSet& labeled() const { return state_.labeled; }
  MetricWeights metric() const { return MetricWeights(state_.metric); }
  std::optional<ClassProbs> class_probs() const;
  const std::vector<IterationRecord>& history() const { return state_.history; }
  const std::vector<double>& last_scores() const { return last_scores_; }

 private:
  ActiveSession(FeatureMatrix train, SessionState state);

  void Advance();
  void Relearn();
  void EstimateProbs();
  void EnterActivePhase();
  Triplet DrawBootstrapTriplet();

  FeatureMatrix features_;
  SessionState state_;
  std::vector<double> last_scores_;
};

struct LoopResult {
  ActiveSession session;
  // True when the oracle stopped answering before the budget was spent.
  bool paused = false;
};

// Runs the loop against `oracle` until the budget is spent or the oracle
// stops answering. `initial` holds free pre-labeled triplets (see
// BootstrapYesNoTriplets); when empty the session opens with counted
// bootstrap queries. `on_answer` (optional) runs after every answer.
LoopResult RunActiveLoop(const FeatureMatrix& train, const LoopConfig& config,
                         Oracle& oracle, const std::vector<LabeledTriplet>& initial,
                         const std::function<void(const ActiveSession&)>& on_answer = {});

}  // namespace relcomp

#endif  // RELCOMP_ACTIVE_SESSION_H_
