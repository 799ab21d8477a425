#ifndef RELCOMP_METRIC_H_
#define RELCOMP_METRIC_H_

#include <span>
#include <vector>

#include "relcomp/triplet.h"
#include "relcomp/types.h"

namespace relcomp {

// Diagonal of a Mahalanobis matrix: d^2(x, y) = sum_f w_f (x_f - y_f)^2.
// All weights are nonnegative and at least one is positive.
class MetricWeights {
 public:
  static MetricWeights Identity(int dim);

  // Throws std::invalid_argument when the invariants do not hold.
  explicit MetricWeights(Eigen::VectorXd weights);
  explicit MetricWeights(std::span<const double> weights);

  int dim() const { return static_cast<int>(weights_.size()); }
  const Eigen::VectorXd& values() const { return weights_; }
  double operator[](int f) const { return weights_[f]; }
  std::vector<double> ToVector() const;

  bool operator==(const MetricWeights& other) const {
    return weights_ == other.weights_;
  }

 private:
  Eigen::VectorXd weights_;
};

double DistanceSq(const MetricWeights& w, FeatureRow a, FeatureRow b);

// yes iff d^2(x_i, x_j) < d^2(x_i, x_k); ties answer no.
Answer PredictAnswer(const MetricWeights& w, const FeatureMatrix& features,
                     const Triplet& t);

struct Constraint {
  Triplet triplet;
  Answer answer = Answer::kYes;  // yes or no only
};

struct LearnerParams {
  double slack_tradeoff = 1.0;  // C in 1/2 |w - 1|^2 + C sum xi
  double margin = 1.0;
  int max_iters = 2000;  // dual coordinate-ascent epochs
  double tolerance = 1e-6;

  void Validate() const;
};

struct LearnResult {
  MetricWeights weights = MetricWeights::Identity(1);
  // Dual variable per input constraint, in input order; pass back as the
  // warm start once more constraints have been appended.
  std::vector<double> duals;
  int epochs = 0;
  bool converged = false;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  // Dual objective after every epoch; non-decreasing.
  std::vector<double> dual_trace;
};

// Solves
//   min_w  1/2 |w - 1|^2 + C sum_t max(0, margin - (d^2(x_i,x_k) - d^2(x_i,x_j)))
//   s.t.   w >= 0
// over the effective "yes" form of each constraint (a "no" on (i,j,k) is the
// "yes" on (i,k,j)). The problem is solved in its box-constrained dual by
// cyclic coordinate ascent with per-coordinate step 1/|z_t|^2; the dual
// objective never decreases and the primal iterate is w = max(0, 1 + Z^T a).
// Coordinates are visited in canonical triplet order, so the result does not
// depend on the order of `constraints`.
//
// `warm_duals` (optional) holds the duals of a previous solve whose
// constraints are a prefix of `constraints`; missing entries start at 0. The
// starting metric is then exactly the previous solution.
LearnResult LearnMetric(const FeatureMatrix& features,
                        std::span<const Constraint> constraints,
                        const LearnerParams& params,
                        std::span<const double> warm_duals = {});

double PrimalObjective(const FeatureMatrix& features,
                       std::span<const Constraint> constraints,
                       const LearnerParams& params, const MetricWeights& w);

// Constraints usable by the learner: yes/no entries of the labeled set.
std::vector<Constraint> ConstraintsFrom(const LabeledTripletSet& labeled);

// Scales each feature column by sqrt(w_f).
FeatureMatrix RescaleFeatures(const FeatureMatrix& features, const MetricWeights& w);

}  // namespace relcomp

#endif  // RELCOMP_METRIC_H_
