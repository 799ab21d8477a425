#ifndef RELCOMP_POOL_H_
#define RELCOMP_POOL_H_

#include <cstdint>
#include <vector>

#include "relcomp/forest.h"
#include "relcomp/info_gain.h"
#include "relcomp/triplet.h"

namespace relcomp {

enum class PoolOrigin { kSampled, kExhaustive };

// Candidate queries. Sampled pools keep their draw order; exhaustive pools
// are in lexicographic order.
struct Pool {
  std::vector<Triplet> candidates;
  PoolOrigin origin = PoolOrigin::kSampled;
  // Probability that the pool's best candidate is in the top-epsilon
  // fraction of all unlabeled triplets, 1 - (1 - epsilon)^|pool|.
  double near_optimal_probability = 0.0;

  bool empty() const { return candidates.empty(); }
  std::size_t size() const { return candidates.size(); }
  // Removes `t` if present; keeps the order of the rest.
  bool Remove(const Triplet& t);
};

struct SelectionParams {
  int pool_factor = 100;
  double epsilon_report = 0.001;
  int budget = 40;
  std::uint64_t seed = 0;

  void Validate() const;
};

// n (n - 1) (n - 2) ordered triplets with distinct members.
std::uint64_t TripletCount(int n);

// The triplet with rank `index` in lexicographic order over all valid
// triplets of n instances.
Triplet TripletAt(int n, std::uint64_t index);

double NearOptimalProbability(double epsilon, std::uint64_t pool_size);

// Draws min(pool_factor * n, |unlabeled|) distinct unlabeled triplets
// uniformly at random. When pool_factor * n covers every unlabeled triplet
// the exhaustive pool is returned instead.
Pool SamplePool(int n, const SelectionParams& params,
                const LabeledTripletSet& already_labeled);

// Every unlabeled triplet, lexicographic order.
Pool ExhaustivePool(int n, const LabeledTripletSet& already_labeled,
                    double epsilon_report = 0.001);

// InfoGain of every candidate, in pool order.
std::vector<double> ScorePool(const Pool& pool, const ClassProbs& cp,
                              LogBase base = LogBase::kNatural);

struct Selection {
  Triplet triplet;
  double score = 0.0;
};

// argmax of InfoGain over the pool; ties go to the lexicographically
// smallest triplet. Throws std::invalid_argument on an empty pool.
Selection SelectQuery(const Pool& pool, const ClassProbs& cp,
                      LogBase base = LogBase::kNatural);
Selection SelectFromScores(const Pool& pool, const std::vector<double>& scores);

}  // namespace relcomp

#endif  // RELCOMP_POOL_H_
