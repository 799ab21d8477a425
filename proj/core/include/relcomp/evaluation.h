#ifndef RELCOMP_EVALUATION_H_
#define RELCOMP_EVALUATION_H_

#include <cstdint>
#include <span>
#include <vector>

#include "relcomp/dataset.h"
#include "relcomp/metric.h"
#include "relcomp/policy.h"
#include "relcomp/pool.h"
#include "relcomp/rng.h"
#include "relcomp/triplet.h"

namespace relcomp {

// Number of ordered triplets in `labels` whose label-derived answer is yes
// or no.
std::uint64_t YesNoTripletCount(std::span<const int> labels, int num_classes);

// Fraction of yes/no test triplets whose answer PredictAnswer gets right.
// All yes/no triplets are used when there are at most `sample_cap` of them;
// otherwise `sample_cap` distinct ones are drawn uniformly without
// replacement. Throws if the fold has no yes/no triplet.
double TripletAccuracy(const MetricWeights& w, const Dataset& test,
                       std::uint64_t sample_cap, std::uint64_t seed);

// 1-NN classification accuracy of `test` against `train`; distance ties go to
// the lower training index.
double OneNnAccuracy(const MetricWeights& w, const Dataset& train,
                     const Dataset& test);

// Next query for a baseline policy. random: uniform over the pool.
// nonredundant: fewest instances shared with any previously selected
// triplet, uniform among ties.
Triplet BaselineNext(PolicyKind kind, const Pool& pool,
                     const LabeledTripletSet& history, Rng& rng);

}  // namespace relcomp

#endif  // RELCOMP_EVALUATION_H_
