#include "relcomp/forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "relcomp/rng.h"

namespace relcomp {

ClassProbs::ClassProbs(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
  Validate(probs_);
}

void ClassProbs::Validate(const Eigen::MatrixXd& probs) {
  if (probs.rows() < 1 || probs.cols() < 1)
    throw std::invalid_argument("ClassProbs: empty matrix");
  for (Eigen::Index h = 0; h < probs.rows(); ++h) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      double p = probs(h, c);
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("ClassProbs: entry outside [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("ClassProbs: row does not sum to 1");
  }
}

int DecisionTree::Predict(const double* row) const {
  int node = 0;
  while (nodes_[node].feature >= 0) {
    const Node& nd = nodes_[node];
    node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes_[node].label;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const int> labels, int num_classes,
              const ForestParams& params, int features_per_split, Rng& rng)
      : x_(x),
        labels_(labels),
        num_classes_(num_classes),
        params_(params),
        features_per_split_(features_per_split),
        rng_(rng) {}

  DecisionTree Build(std::vector<int> sample) {
    DecisionTree tree;
    struct Work {
      int node;
      std::vector<int> members;
      int depth;
    };
    std::vector<Work> stack;
    tree.nodes_.emplace_back();
    stack.push_back({0, std::move(sample), 0});
    while (!stack.empty()) {
      Work work = std::move(stack.back());
      stack.pop_back();
      std::vector<int> counts(num_classes_, 0);
      for (int h : work.members) ++counts[labels_[h]];
      int majority = static_cast<int>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      tree.nodes_[work.node].label = majority;

      const int size = static_cast<int>(work.members.size());
      bool pure = counts[majority] == size;
      bool depth_cap = params_.max_depth > 0 && work.depth >= params_.max_depth;
      if (pure || depth_cap || size < 2 * params_.min_leaf) continue;

      Split best;
      if (!FindSplit(work.members, counts, best)) continue;

      std::vector<int> left, right;
      for (int h : work.members)
        (x_(h, best.feature) <= best.threshold ? left : right).push_back(h);

      int left_id = static_cast<int>(tree.nodes_.size());
      tree.nodes_.emplace_back();
      int right_id = static_cast<int>(tree.nodes_.size());
      tree.nodes_.emplace_back();
      auto& nd = tree.nodes_[work.node];
      nd.feature = best.feature;
      nd.threshold = best.threshold;
      nd.left = left_id;
      nd.right = right_id;
      stack.push_back({right_id, std::move(right), work.depth + 1});
      stack.push_back({left_id, std::move(left), work.depth + 1});
    }
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  static double Gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double s = 0.0;
    for (int c : counts) s += static_cast<double>(c) * c;
    return 1.0 - s / (static_cast<double>(total) * total);
  }

  // Features are visited in a random order until `features_per_split`
  // non-constant ones have been evaluated.
  bool FindSplit(std::vector<int>& members, const std::vector<int>& counts, Split& best) {
    const int d = static_cast<int>(x_.cols());
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng_);

    const int size = static_cast<int>(members.size());
    bool found = false;
    int evaluated = 0;
    std::vector<int> left_counts(num_classes_);
    std::vector<int> right_counts(num_classes_);
    for (int f : features) {
      if (evaluated >= features_per_split_) break;
      std::stable_sort(members.begin(), members.end(),
                       [&](int a, int b) { return x_(a, f) < x_(b, f); });
      if (x_(members.front(), f) == x_(members.back(), f)) continue;
      ++evaluated;
      std::fill(left_counts.begin(), left_counts.end(), 0);
      right_counts = counts;
      for (int p = 1; p < size; ++p) {
        int moved = labels_[members[p - 1]];
        ++left_counts[moved];
        --right_counts[moved];
        double lo = x_(members[p - 1], f);
        double hi = x_(members[p], f);
        if (!(lo < hi)) continue;
        if (p < params_.min_leaf || size - p < params_.min_leaf) continue;
        double impurity = (p * Gini(left_counts, p) +
                           (size - p) * Gini(right_counts, size - p)) /
                          size;
        if (!found || impurity < best.impurity) {
          double mid = lo + (hi - lo) / 2.0;
          best = {f, mid < hi ? mid : lo, impurity};
          found = true;
        }
      }
    }
    return found;
  }

  const FeatureMatrix& x_;
  std::span<const int> labels_;
  int num_classes_;
  const ForestParams& params_;
  int features_per_split_;
  Rng& rng_;
};

RandomForest RandomForest::Fit(const FeatureMatrix& features, std::span<const int> labels,
                               int num_classes, const ForestParams& params) {
  const int n = static_cast<int>(features.rows());
  if (n == 0) throw std::invalid_argument("RandomForest: empty training view");
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("RandomForest: label count mismatch");
  if (params.num_trees < 1 || params.min_leaf < 1)
    throw std::invalid_argument("RandomForest: num_trees and min_leaf must be >= 1");
  if (num_classes < 1) throw std::invalid_argument("RandomForest: num_classes < 1");
  for (int y : labels)
    if (y < 0 || y >= num_classes) throw std::invalid_argument("RandomForest: label out of range");

  const int d = static_cast<int>(features.cols());
  int per_split = params.features_per_split > 0
                      ? std::min(params.features_per_split, d)
                      : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  RandomForest forest;
  forest.num_classes_ = num_classes;
  forest.trees_.reserve(params.num_trees);
  forest.in_bag_.assign(params.num_trees, std::vector<int>(n, 0));
  for (int t = 0; t < params.num_trees; ++t) {
    Rng rng(DeriveSeed(params.seed, kStreamForest, static_cast<std::uint64_t>(t)));
    std::vector<int> sample(n);
    for (int s = 0; s < n; ++s) {
      sample[s] = static_cast<int>(UniformIndex(rng, n));
      ++forest.in_bag_[t][sample[s]];
    }
    std::sort(sample.begin(), sample.end());
    TreeBuilder builder(features, labels, num_classes, params, per_split, rng);
    forest.trees_.push_back(builder.Build(std::move(sample)));
  }
  return forest;
}

ClassProbs RandomForest::OutOfBagProbs(const FeatureMatrix& features) const {
  const int n = static_cast<int>(features.rows());
  const int k = num_classes_;
  Eigen::MatrixXd probs(n, k);
  std::vector<int> oob(k), all(k);
  for (int h = 0; h < n; ++h) {
    std::fill(oob.begin(), oob.end(), 0);
    std::fill(all.begin(), all.end(), 0);
    int oob_total = 0;
    const double* row = features.row(h).data();
    for (int t = 0; t < num_trees(); ++t) {
      int vote = trees_[t].Predict(row);
      ++all[vote];
      if (in_bag_[t][h] == 0) {
        ++oob[vote];
        ++oob_total;
      }
    }
    const std::vector<int>& votes = oob_total > 0 ? oob : all;
    const int total = oob_total > 0 ? oob_total : num_trees();
    for (int c = 0; c < k; ++c)
      probs(h, c) = (votes[c] + 1.0) / (total + static_cast<double>(k));
  }
  return ClassProbs(std::move(probs));
}

ClassProbs EstimateClassProbs(const FeatureMatrix& features, std::span<const int> labels,
                              int num_classes, const ForestParams& params) {
  return RandomForest::Fit(features, labels, num_classes, params).OutOfBagProbs(features);
}

}  // namespace relcomp
