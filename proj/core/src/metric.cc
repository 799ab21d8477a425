#include "relcomp/metric.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace relcomp {
namespace {

Triplet Effective(const Constraint& c) {
  return c.answer == Answer::kYes ? c.triplet : c.triplet.Mirrored();
}

void CheckWeights(const Eigen::VectorXd& w) {
  if (w.size() < 1) throw std::invalid_argument("MetricWeights: empty");
  bool positive = false;
  for (Eigen::Index f = 0; f < w.size(); ++f) {
    if (!std::isfinite(w[f]) || w[f] < 0.0)
      throw std::invalid_argument("MetricWeights: weights must be finite and >= 0");
    positive = positive || w[f] > 0.0;
  }
  if (!positive) throw std::invalid_argument("MetricWeights: all weights are zero");
}

// (x_i - x_k)^2 - (x_i - x_j)^2 for the effective "yes" triplet.
Eigen::VectorXd ConstraintDirection(const FeatureMatrix& x, const Triplet& t) {
  Eigen::RowVectorXd a = (x.row(t.i) - x.row(t.k)).array().square();
  Eigen::RowVectorXd b = (x.row(t.i) - x.row(t.j)).array().square();
  return (a - b).transpose();
}

void CheckConstraints(const FeatureMatrix& features,
                      std::span<const Constraint> constraints) {
  const int n = static_cast<int>(features.rows());
  for (const auto& c : constraints) {
    if (!c.triplet.IsValid(n))
      throw std::invalid_argument("constraint references an instance outside the view");
    if (c.answer == Answer::kDontKnow)
      throw std::invalid_argument("dk answers carry no metric constraint");
  }
}

}  // namespace

MetricWeights MetricWeights::Identity(int dim) {
  return MetricWeights(Eigen::VectorXd::Ones(dim));
}

MetricWeights::MetricWeights(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  CheckWeights(weights_);
}

MetricWeights::MetricWeights(std::span<const double> weights)
    : weights_(Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                 static_cast<Eigen::Index>(weights.size()))) {
  CheckWeights(weights_);
}

std::vector<double> MetricWeights::ToVector() const {
  return std::vector<double>(weights_.data(), weights_.data() + weights_.size());
}

double DistanceSq(const MetricWeights& w, FeatureRow a, FeatureRow b) {
  if (a.size() != w.dim() || b.size() != w.dim())
    throw std::invalid_argument("DistanceSq: dimension mismatch");
  double s = 0.0;
  for (int f = 0; f < w.dim(); ++f) {
    double diff = a[f] - b[f];
    s += w[f] * diff * diff;
  }
  return s;
}

Answer PredictAnswer(const MetricWeights& w, const FeatureMatrix& features,
                     const Triplet& t) {
  if (!t.IsValid(static_cast<int>(features.rows())))
    throw std::invalid_argument("PredictAnswer: invalid triplet");
  double dij = DistanceSq(w, features.row(t.i), features.row(t.j));
  double dik = DistanceSq(w, features.row(t.i), features.row(t.k));
  return dij < dik ? Answer::kYes : Answer::kNo;
}

void LearnerParams::Validate() const {
  if (!(slack_tradeoff > 0.0) || !(margin > 0.0) || !(tolerance > 0.0) || max_iters < 1)
    throw std::invalid_argument("LearnerParams: all parameters must be positive");
}

double PrimalObjective(const FeatureMatrix& features,
                       std::span<const Constraint> constraints,
                       const LearnerParams& params, const MetricWeights& w) {
  double obj = 0.5 * (w.values().array() - 1.0).square().sum();
  for (const auto& c : constraints) {
    double zw = ConstraintDirection(features, Effective(c)).dot(w.values());
    obj += params.slack_tradeoff * std::max(0.0, params.margin - zw);
  }
  return obj;
}

LearnResult LearnMetric(const FeatureMatrix& features,
                        std::span<const Constraint> constraints,
                        const LearnerParams& params,
                        std::span<const double> warm_duals) {
  params.Validate();
  CheckConstraints(features, constraints);
  if (warm_duals.size() > constraints.size())
    throw std::invalid_argument("LearnMetric: more warm-start duals than constraints");

  const int d = static_cast<int>(features.cols());
  const int m = static_cast<int>(constraints.size());
  const double cap = params.slack_tradeoff;

  // Canonical visiting order.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    Triplet ea = Effective(constraints[a]), eb = Effective(constraints[b]);
    if (ea != eb) return ea < eb;
    if (constraints[a].triplet != constraints[b].triplet)
      return constraints[a].triplet < constraints[b].triplet;
    return constraints[a].answer < constraints[b].answer;
  });

  Eigen::MatrixXd z(d, m);
  Eigen::VectorXd sq_norm(m);
  for (int t = 0; t < m; ++t) {
    z.col(t) = ConstraintDirection(features, Effective(constraints[t]));
    sq_norm[t] = z.col(t).squaredNorm();
  }

  std::vector<double> beta(m, 0.0);
  for (std::size_t t = 0; t < warm_duals.size(); ++t)
    beta[t] = std::clamp(warm_duals[t], 0.0, cap);

  // u is accumulated in canonical order so that it does not depend on the
  // input permutation.
  Eigen::VectorXd u = Eigen::VectorXd::Ones(d);
  for (int t : order)
    if (beta[t] != 0.0) u += beta[t] * z.col(t);
  Eigen::VectorXd w = u.cwiseMax(0.0);

  auto dual_objective = [&]() {
    double sum_beta = 0.0;
    for (int t : order) sum_beta += beta[t];
    return params.margin * sum_beta + 0.5 * d - 0.5 * w.squaredNorm();
  };

  LearnResult result;
  for (int epoch = 0; epoch < params.max_iters && m > 0; ++epoch) {
    double max_violation = 0.0;
    for (int t : order) {
      double grad = params.margin - z.col(t).dot(w);
      double pg = grad;
      if (beta[t] <= 0.0) pg = std::max(grad, 0.0);
      else if (beta[t] >= cap) pg = std::min(grad, 0.0);
      max_violation = std::max(max_violation, std::abs(pg));
      if (pg == 0.0) continue;

      double next = sq_norm[t] > 0.0 ? std::clamp(beta[t] + grad / sq_norm[t], 0.0, cap)
                                     : (grad > 0.0 ? cap : beta[t]);
      double delta = next - beta[t];
      if (delta == 0.0) continue;
      beta[t] = next;
      u += delta * z.col(t);
      w = u.cwiseMax(0.0);
    }
    result.dual_trace.push_back(dual_objective());
    result.epochs = epoch + 1;
    if (max_violation <= params.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (m == 0) result.converged = true;

  // Degenerate case: every weight was pushed to zero. Fall back to the prior
  // direction scaled down so the metric stays valid.
  if (!(w.array() > 0.0).any()) w = Eigen::VectorXd::Constant(d, 1e-12);

  result.weights = MetricWeights(w);
  result.dual_objective = m > 0 ? dual_objective() : 0.0;
  result.duals = std::move(beta);
  result.primal_objective = PrimalObjective(features, constraints, params, result.weights);
  return result;
}

std::vector<Constraint> ConstraintsFrom(const LabeledTripletSet& labeled) {
  std::vector<Constraint> out;
  for (const auto& e : labeled.entries())
    if (IsYesNo(e.answer)) out.push_back({e.triplet, e.answer});
  return out;
}

FeatureMatrix RescaleFeatures(const FeatureMatrix& features, const MetricWeights& w) {
  if (features.cols() != w.dim())
    throw std::invalid_argument("RescaleFeatures: dimension mismatch");
  FeatureMatrix out = features;
  for (int f = 0; f < w.dim(); ++f) out.col(f) *= std::sqrt(w[f]);
  return out;
}

}  // namespace relcomp
