#include "relcomp/pool.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "relcomp/rng.h"

namespace relcomp {

bool Pool::Remove(const Triplet& t) {
  auto it = std::find(candidates.begin(), candidates.end(), t);
  if (it == candidates.end()) return false;
  candidates.erase(it);
  return true;
}

void SelectionParams::Validate() const {
  if (pool_factor < 1) throw std::invalid_argument("pool_factor must be >= 1");
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (!(epsilon_report > 0.0 && epsilon_report < 1.0))
    throw std::invalid_argument("epsilon_report must lie in (0, 1)");
}

std::uint64_t TripletCount(int n) {
  if (n < 3) return 0;
  auto m = static_cast<std::uint64_t>(n);
  return m * (m - 1) * (m - 2);
}

Triplet TripletAt(int n, std::uint64_t index) {
  const auto m = static_cast<std::uint64_t>(n);
  const std::uint64_t per_anchor = (m - 1) * (m - 2);
  Triplet t;
  t.i = static_cast<int>(index / per_anchor);
  std::uint64_t rest = index % per_anchor;
  int j = static_cast<int>(rest / (m - 2));
  int k = static_cast<int>(rest % (m - 2));
  t.j = j >= t.i ? j + 1 : j;
  // k ranges over the n - 2 instances other than i and j, ascending.
  int lo = std::min(t.i, t.j), hi = std::max(t.i, t.j);
  if (k >= lo) ++k;
  if (k >= hi) ++k;
  t.k = k;
  return t;
}

double NearOptimalProbability(double epsilon, std::uint64_t pool_size) {
  return 1.0 - std::pow(1.0 - epsilon, static_cast<double>(pool_size));
}

Pool ExhaustivePool(int n, const LabeledTripletSet& already_labeled, double epsilon_report) {
  if (n < 3) throw std::invalid_argument("pool needs at least 3 instances");
  Pool pool;
  pool.origin = PoolOrigin::kExhaustive;
  const std::uint64_t total = TripletCount(n);
  pool.candidates.reserve(total - std::min<std::uint64_t>(total, already_labeled.size()));
  for (std::uint64_t u = 0; u < total; ++u) {
    Triplet t = TripletAt(n, u);
    if (!already_labeled.Contains(t)) pool.candidates.push_back(t);
  }
  pool.near_optimal_probability = NearOptimalProbability(epsilon_report, pool.size());
  return pool;
}

Pool SamplePool(int n, const SelectionParams& params,
                const LabeledTripletSet& already_labeled) {
  if (n < 3) throw std::invalid_argument("pool needs at least 3 instances");
  params.Validate();
  const std::uint64_t total = TripletCount(n);
  std::uint64_t labeled_valid = 0;
  for (const auto& e : already_labeled.entries())
    labeled_valid += e.triplet.IsValid(n) ? 1 : 0;
  const std::uint64_t unlabeled = total - labeled_valid;
  const std::uint64_t target =
      static_cast<std::uint64_t>(params.pool_factor) * static_cast<std::uint64_t>(n);
  if (target >= unlabeled) return ExhaustivePool(n, already_labeled, params.epsilon_report);

  Pool pool;
  pool.origin = PoolOrigin::kSampled;
  pool.candidates.reserve(target);
  Rng rng(DeriveSeed(params.seed, kStreamPool));
  std::uniform_int_distribution<std::uint64_t> draw(0, total - 1);
  std::unordered_set<Triplet, TripletHash> taken;
  taken.reserve(target * 2);
  while (pool.candidates.size() < target) {
    Triplet t = TripletAt(n, draw(rng));
    if (already_labeled.Contains(t)) continue;
    if (!taken.insert(t).second) continue;
    pool.candidates.push_back(t);
  }
  pool.near_optimal_probability = NearOptimalProbability(params.epsilon_report, pool.size());
  return pool;
}

std::vector<double> ScorePool(const Pool& pool, const ClassProbs& cp, LogBase base) {
  std::vector<double> scores(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p)
    scores[p] = InfoGain(cp, pool.candidates[p], base);
  return scores;
}

Selection SelectFromScores(const Pool& pool, const std::vector<double>& scores) {
  if (pool.empty()) throw std::invalid_argument("SelectQuery: empty pool");
  if (scores.size() != pool.size())
    throw std::invalid_argument("SelectQuery: score count mismatch");
  std::size_t best = 0;
  for (std::size_t p = 1; p < pool.size(); ++p) {
    if (scores[p] > scores[best] ||
        (scores[p] == scores[best] && pool.candidates[p] < pool.candidates[best])) {
      best = p;
    }
  }
  return {pool.candidates[best], scores[best]};
}

Selection SelectQuery(const Pool& pool, const ClassProbs& cp, LogBase base) {
  if (pool.empty()) throw std::invalid_argument("SelectQuery: empty pool");
  return SelectFromScores(pool, ScorePool(pool, cp, base));
}

}  // namespace relcomp
