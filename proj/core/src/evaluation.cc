#include "relcomp/evaluation.h"

#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "relcomp/oracle.h"

namespace relcomp {
namespace {

struct ClassIndex {
  std::vector<std::vector<int>> members;
  std::vector<std::vector<int>> others;
  std::vector<std::uint64_t> yes_offsets;  // cumulative yes-triplet counts
  std::uint64_t yes_total = 0;
};

ClassIndex BuildIndex(std::span<const int> labels, int num_classes) {
  ClassIndex idx;
  idx.members.resize(num_classes);
  idx.others.resize(num_classes);
  for (int h = 0; h < static_cast<int>(labels.size()); ++h) {
    for (int c = 0; c < num_classes; ++c)
      (labels[h] == c ? idx.members[c] : idx.others[c]).push_back(h);
  }
  idx.yes_offsets.push_back(0);
  for (int c = 0; c < num_classes; ++c) {
    std::uint64_t m = idx.members[c].size();
    std::uint64_t count = m < 2 ? 0 : m * (m - 1) * idx.others[c].size();
    idx.yes_total += count;
    idx.yes_offsets.push_back(idx.yes_total);
  }
  return idx;
}

// Indices below yes_total are yes triplets (i, j same class, k outside); the
// rest are their mirrors, which are no triplets.
Triplet DecodeYesNo(const ClassIndex& idx, std::uint64_t u, bool* is_yes) {
  *is_yes = u < idx.yes_total;
  std::uint64_t v = *is_yes ? u : u - idx.yes_total;
  int c = 0;
  while (v >= idx.yes_offsets[c + 1]) ++c;
  v -= idx.yes_offsets[c];
  const auto& in = idx.members[c];
  const auto& out = idx.others[c];
  const std::uint64_t m = in.size();
  const std::uint64_t per_anchor = (m - 1) * out.size();
  std::uint64_t a = v / per_anchor;
  std::uint64_t rest = v % per_anchor;
  std::uint64_t b = rest / out.size();
  std::uint64_t o = rest % out.size();
  if (b >= a) ++b;
  Triplet t{in[a], in[b], out[o]};
  return *is_yes ? t : t.Mirrored();
}

}  // namespace

std::uint64_t YesNoTripletCount(std::span<const int> labels, int num_classes) {
  return 2 * BuildIndex(labels, num_classes).yes_total;
}

double TripletAccuracy(const MetricWeights& w, const Dataset& test,
                       std::uint64_t sample_cap, std::uint64_t seed) {
  if (!test.labels) throw std::invalid_argument("TripletAccuracy: test fold is unlabeled");
  if (test.dim() != w.dim()) throw std::invalid_argument("TripletAccuracy: dimension mismatch");
  ClassIndex idx = BuildIndex(*test.labels, test.num_classes);
  const std::uint64_t total = 2 * idx.yes_total;
  if (total == 0) throw std::invalid_argument("TripletAccuracy: fold has no yes/no triplet");
  if (sample_cap == 0) throw std::invalid_argument("TripletAccuracy: sample_cap must be > 0");

  const int n = test.size();
  Eigen::MatrixXd dist(n, n);
  for (int a = 0; a < n; ++a) {
    dist(a, a) = 0.0;
    for (int b = a + 1; b < n; ++b)
      dist(a, b) = dist(b, a) = DistanceSq(w, test.features.row(a), test.features.row(b));
  }
  auto correct = [&](std::uint64_t u) {
    bool is_yes = false;
    Triplet t = DecodeYesNo(idx, u, &is_yes);
    bool predicted_yes = dist(t.i, t.j) < dist(t.i, t.k);
    return predicted_yes == is_yes;
  };

  std::uint64_t hits = 0;
  std::uint64_t evaluated = 0;
  if (total <= sample_cap) {
    for (std::uint64_t u = 0; u < total; ++u) hits += correct(u) ? 1 : 0;
    evaluated = total;
  } else {
    Rng rng(DeriveSeed(seed, kStreamEvaluation));
    std::uniform_int_distribution<std::uint64_t> draw(0, total - 1);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(sample_cap * 2);
    while (evaluated < sample_cap) {
      std::uint64_t u = draw(rng);
      if (!seen.insert(u).second) continue;
      hits += correct(u) ? 1 : 0;
      ++evaluated;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(evaluated);
}

double OneNnAccuracy(const MetricWeights& w, const Dataset& train, const Dataset& test) {
  if (!train.labels || !test.labels)
    throw std::invalid_argument("OneNnAccuracy: both folds need labels");
  if (train.size() == 0 || test.size() == 0)
    throw std::invalid_argument("OneNnAccuracy: empty fold");
  int hits = 0;
  for (int q = 0; q < test.size(); ++q) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int r = 0; r < train.size(); ++r) {
      double d = DistanceSq(w, test.features.row(q), train.features.row(r));
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    hits += (*train.labels)[best] == (*test.labels)[q] ? 1 : 0;
  }
  return static_cast<double>(hits) / test.size();
}

Triplet BaselineNext(PolicyKind kind, const Pool& pool, const LabeledTripletSet& history,
                     Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("BaselineNext: empty pool");
  switch (kind) {
    case PolicyKind::kRandom:
      return pool.candidates[UniformIndex(rng, pool.size())];
    case PolicyKind::kNonredundant: {
      std::unordered_set<int> used;
      for (const auto& e : history.entries()) {
        used.insert(e.triplet.i);
        used.insert(e.triplet.j);
        used.insert(e.triplet.k);
      }
      int best = 4;
      std::vector<std::size_t> ties;
      for (std::size_t p = 0; p < pool.size(); ++p) {
        const Triplet& t = pool.candidates[p];
        int overlap = static_cast<int>(used.contains(t.i)) +
                      static_cast<int>(used.contains(t.j)) +
                      static_cast<int>(used.contains(t.k));
        if (overlap < best) {
          best = overlap;
          ties.clear();
        }
        if (overlap == best) ties.push_back(p);
      }
      return pool.candidates[ties[UniformIndex(rng, ties.size())]];
    }
    default:
      throw std::invalid_argument("BaselineNext: not a baseline policy");
  }
}

}  // namespace relcomp
