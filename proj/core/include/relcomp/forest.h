#ifndef RELCOMP_FOREST_H_
#define RELCOMP_FOREST_H_

#include <cstdint>
#include <span>
#include <vector>

#include "relcomp/types.h"

namespace relcomp {

// Row-stochastic n x C estimate of p(y_h = c | labeled triplets).
class ClassProbs {
 public:
  ClassProbs() = default;
  explicit ClassProbs(Eigen::MatrixXd probs);  // validates

  int size() const { return static_cast<int>(probs_.rows()); }
  int num_classes() const { return static_cast<int>(probs_.cols()); }
  double operator()(int h, int c) const { return probs_(h, c); }
  const Eigen::MatrixXd& matrix() const { return probs_; }

  // Throws std::invalid_argument unless rows sum to 1 within 1e-9 and all
  // entries lie in [0, 1].
  static void Validate(const Eigen::MatrixXd& probs);

 private:
  Eigen::MatrixXd probs_;
};

struct ForestParams {
  int num_trees = 50;
  int max_depth = 0;  // 0 = unlimited
  int min_leaf = 1;
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
  std::uint64_t seed = 0;
};

// CART classification tree with Gini splits.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;  // majority class, set on every node
  };

  int Predict(const double* row) const;
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

class RandomForest {
 public:
  // Each tree is grown on a bootstrap sample of size n drawn with
  // replacement.
  static RandomForest Fit(const FeatureMatrix& features, std::span<const int> labels,
                          int num_classes, const ForestParams& params);

  int num_trees() const { return static_cast<int>(trees_.size()); }
  int num_classes() const { return num_classes_; }
  const DecisionTree& tree(int t) const { return trees_[t]; }
  // How many times instance h was drawn into tree t's bootstrap sample.
  int InBagCount(int t, int h) const { return in_bag_[t][h]; }

  // Laplace-smoothed out-of-bag vote fractions,
  // (votes_c + 1) / (oob_trees + C). An instance that is in-bag for every
  // tree falls back to the full-forest vote.
  ClassProbs OutOfBagProbs(const FeatureMatrix& features) const;

 private:
  std::vector<DecisionTree> trees_;
  std::vector<std::vector<int>> in_bag_;
  int num_classes_ = 0;
};

// Fits a forest on (features, cluster labels) and returns its OOB probs.
ClassProbs EstimateClassProbs(const FeatureMatrix& features,
                              std::span<const int> labels, int num_classes,
                              const ForestParams& params);

}  // namespace relcomp

#endif  // RELCOMP_FOREST_H_
