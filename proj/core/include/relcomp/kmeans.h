#ifndef RELCOMP_KMEANS_H_
#define RELCOMP_KMEANS_H_

#include <cstdint>
#include <vector>

#include "relcomp/metric.h"
#include "relcomp/types.h"

namespace relcomp {

struct KMeansParams {
  int num_clusters = 2;
  int max_iters = 100;
  int restarts = 5;
  std::uint64_t seed = 0;
};

struct Clustering {
  std::vector<int> assignments;
  // Cluster means in the original feature space.
  FeatureMatrix centroids;
  // Weighted within-cluster sum of squares of the kept restart.
  double inertia = 0.0;
  int iterations = 0;
  // Inertia after every assignment step of the kept restart.
  std::vector<double> inertia_trace;
};

// Lloyd's algorithm under the diagonal metric, run in the space rescaled by
// sqrt(w). k-means++ seeding, `restarts` independent restarts (lowest inertia
// kept, earliest on ties), distance ties go to the lower cluster index, and
// an empty cluster is re-seeded with the point farthest from its centroid.
Clustering KMeans(const FeatureMatrix& features, const MetricWeights& w,
                  const KMeansParams& params);

}  // namespace relcomp

#endif  // RELCOMP_KMEANS_H_
