#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aa/common/matrix.hpp"

namespace aa {

struct Clustering {
  std::size_t k = 0;
  Matrix centroids;                     // k x dim
  std::vector<std::size_t> assignment;  // per input row, in [0, k)
  double inertia = 0.0;
  std::size_t iterations = 0;
  // Inertia after each assignment step, starting with the initial centroids.
  std::vector<double> inertia_trace;

  // Input rows per cluster, ascending.
  std::vector<std::vector<std::size_t>> members() const;

  bool operator==(const Clustering&) const = default;
};

struct Seeding {
  std::vector<std::size_t> indices;  // chosen input rows, in pick order
  Matrix centroids;
};

// k-means++: first centre uniform over points, each further centre drawn with
// probability proportional to its squared distance to the nearest chosen
// centre. When every remaining distance is zero the pick is uniform over the
// points not yet chosen.
Seeding kmeanspp_seed(const Matrix& points, std::size_t k, std::uint64_t seed);

// Same, with the first centre fixed. Exposed for testing the D^2 step.
Seeding kmeanspp_seed_from(const Matrix& points, std::size_t first, std::size_t k, std::uint64_t seed);

struct LloydOptions {
  std::size_t max_iter = 300;
  double tol = 1e-6;
};

// Alternates nearest-centroid assignment (lowest index on exact ties) and mean
// update until the largest centroid shift falls below tol or max_iter
// updates have run. An empty cluster takes the point farthest from its own
// centroid. The returned assignment is the nearest-centroid assignment for the
// returned centroids.
Clustering lloyd(const Matrix& points, const Matrix& init_centroids, const LloydOptions& options = {});

// Sum of squared distances from each row to its assigned centroid.
double compute_inertia(const Matrix& points, const Matrix& centroids, const std::vector<std::size_t>& assignment);

// Reorders clusters by their smallest member row; empty clusters go last.
void canonicalize(Clustering& c);

// Seeded k-means++ followed by Lloyd, best inertia over `restarts` seeds.
Clustering kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts = 1,
                  const LloydOptions& options = {});

struct ElbowOptions {
  std::size_t k_min = 2;
  std::size_t k_max = 30;  // clamped to n - 1
  std::size_t seeds_per_k = 5;
  LloydOptions lloyd;
};

struct ElbowResult {
  std::vector<std::size_t> ks;
  std::vector<double> sse;
  std::size_t selected_k = 0;
  bool no_elbow = false;
  Clustering best;  // clustering behind sse at selected_k
};

struct ElbowPick {
  std::size_t k = 0;
  bool no_elbow = false;
};

// Chord-distance elbow on axes normalized to [0, 1]: picks the k whose point
// lies farthest from the line joining the curve's endpoints; the smallest k
// wins ties. A flat curve (or one with no point off the chord) returns ks[0]
// with no_elbow set.
ElbowPick select_elbow(const std::vector<std::size_t>& ks, const std::vector<double>& sse);

// Runs k-means for every k in [k_min, k_max] and picks the elbow. When the
// range collapses (k_max <= k_min after clamping) k = min(k_min, n) is used
// and no_elbow is set.
ElbowResult elbow_select_k(const Matrix& points, std::uint64_t seed, const ElbowOptions& options = {});

}  // namespace aa
