#include "relcomp/kmeans.h"

#include <limits>
#include <stdexcept>

#include "relcomp/rng.h"

namespace relcomp {
namespace {

struct Run {
  std::vector<int> assignments;
  FeatureMatrix centroids;  // scaled space
  std::vector<double> trace;
  int iterations = 0;
};

double SqDist(const FeatureMatrix& a, int ra, const FeatureMatrix& b, int rb) {
  return (a.row(ra) - b.row(rb)).squaredNorm();
}

FeatureMatrix SeedPlusPlus(const FeatureMatrix& x, int k, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  FeatureMatrix centers(k, x.cols());
  centers.row(0) = x.row(static_cast<int>(UniformIndex(rng, n)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int h = 0; h < n; ++h) {
      nearest[h] = std::min(nearest[h], SqDist(x, h, centers, c - 1));
      total += nearest[h];
    }
    int pick = n - 1;
    if (total > 0.0) {
      double target = UniformUnit(rng) * total;
      double acc = 0.0;
      for (int h = 0; h < n; ++h) {
        acc += nearest[h];
        if (acc > target) {
          pick = h;
          break;
        }
      }
    } else {
      pick = static_cast<int>(UniformIndex(rng, n));
    }
    centers.row(c) = x.row(pick);
  }
  return centers;
}

// Nearest centroid per point (lower index on ties); returns the inertia.
double Assign(const FeatureMatrix& x, const FeatureMatrix& centers,
              std::vector<int>& assignments, std::vector<double>& dist) {
  double inertia = 0.0;
  for (int h = 0; h < x.rows(); ++h) {
    int best = 0;
    double best_d = SqDist(x, h, centers, 0);
    for (int c = 1; c < centers.rows(); ++c) {
      double d = SqDist(x, h, centers, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignments[h] = best;
    dist[h] = best_d;
    inertia += best_d;
  }
  return inertia;
}

// Moves the point farthest from its centroid into each empty cluster.
// Returns the inertia after repair.
double RepairEmpty(const FeatureMatrix& x, FeatureMatrix& centers,
                   std::vector<int>& assignments, std::vector<double>& dist,
                   double inertia) {
  const int k = static_cast<int>(centers.rows());
  std::vector<int> count(k, 0);
  for (int a : assignments) ++count[a];
  for (int c = 0; c < k; ++c) {
    if (count[c] > 0) continue;
    int far = -1;
    for (int h = 0; h < x.rows(); ++h) {
      if (count[assignments[h]] <= 1) continue;
      if (far < 0 || dist[h] > dist[far]) far = h;
    }
    if (far < 0) break;  // cannot happen while k <= n
    --count[assignments[far]];
    ++count[c];
    inertia -= dist[far];
    assignments[far] = c;
    dist[far] = 0.0;
    centers.row(c) = x.row(far);
  }
  return inertia;
}

// Means of assigned points; returns the inertia w.r.t. the new means.
double Update(const FeatureMatrix& x, const std::vector<int>& assignments,
              FeatureMatrix& centers, std::vector<double>& dist) {
  const int k = static_cast<int>(centers.rows());
  FeatureMatrix sums = FeatureMatrix::Zero(k, x.cols());
  std::vector<int> count(k, 0);
  for (int h = 0; h < x.rows(); ++h) {
    sums.row(assignments[h]) += x.row(h);
    ++count[assignments[h]];
  }
  for (int c = 0; c < k; ++c)
    if (count[c] > 0) centers.row(c) = sums.row(c) / count[c];
  double inertia = 0.0;
  for (int h = 0; h < x.rows(); ++h) {
    dist[h] = SqDist(x, h, centers, assignments[h]);
    inertia += dist[h];
  }
  return inertia;
}

Run Lloyd(const FeatureMatrix& x, int k, int max_iters, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  Run run;
  run.centroids = SeedPlusPlus(x, k, rng);
  run.assignments.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  double inertia = Assign(x, run.centroids, run.assignments, dist);
  inertia = RepairEmpty(x, run.centroids, run.assignments, dist, inertia);
  run.trace.push_back(inertia);
  for (int it = 0; it < max_iters; ++it) {
    run.iterations = it + 1;
    Update(x, run.assignments, run.centroids, dist);
    std::vector<int> previous = run.assignments;
    inertia = Assign(x, run.centroids, run.assignments, dist);
    inertia = RepairEmpty(x, run.centroids, run.assignments, dist, inertia);
    run.trace.push_back(inertia);
    if (run.assignments == previous) break;
  }
  run.trace.push_back(Update(x, run.assignments, run.centroids, dist));
  return run;
}

}  // namespace

Clustering KMeans(const FeatureMatrix& features, const MetricWeights& w,
                  const KMeansParams& params) {
  const int n = static_cast<int>(features.rows());
  const int k = params.num_clusters;
  if (k < 1) throw std::invalid_argument("KMeans: need at least one cluster");
  if (k > n) throw std::invalid_argument("KMeans: more clusters than points");
  if (params.restarts < 1 || params.max_iters < 1)
    throw std::invalid_argument("KMeans: restarts and max_iters must be >= 1");

  FeatureMatrix x = RescaleFeatures(features, w);
  Run best;
  bool have = false;
  for (int r = 0; r < params.restarts; ++r) {
    Rng rng(DeriveSeed(params.seed, kStreamKMeans, static_cast<std::uint64_t>(r)));
    Run run = Lloyd(x, k, params.max_iters, rng);
    if (!have || run.trace.back() < best.trace.back()) {
      best = std::move(run);
      have = true;
    }
  }

  Clustering out;
  out.assignments = best.assignments;
  out.inertia = best.trace.back();
  out.inertia_trace = best.trace;
  out.iterations = best.iterations;
  out.centroids = FeatureMatrix::Zero(k, features.cols());
  std::vector<int> count(k, 0);
  for (int h = 0; h < n; ++h) {
    out.centroids.row(out.assignments[h]) += features.row(h);
    ++count[out.assignments[h]];
  }
  for (int c = 0; c < k; ++c)
    if (count[c] > 0) out.centroids.row(c) /= count[c];
  return out;
}

}  // namespace relcomp
