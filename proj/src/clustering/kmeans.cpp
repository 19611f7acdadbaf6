#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aa/clustering.hpp"
#include "aa/common/error.hpp"
#include "aa/common/rng.hpp"
#include "aa/simd/kernels.hpp"

namespace aa {

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t r = 0; r < assignment.size(); ++r) out[assignment[r]].push_back(r);
  return out;
}

namespace {

void check_points(const Matrix& points) {
  if (!all_finite(points)) throw Error(ErrorCode::kInvalidArgument, "clustering input contains non-finite values");
}

// Assigns every point to its nearest centroid; returns inertia.
double assign(const Matrix& points, const Matrix& centroids, std::vector<std::size_t>& assignment,
              std::vector<double>& dist2) {
  double inertia = 0.0;
  for (std::size_t r = 0; r < points.rows; ++r) {
    const auto nearest = simd::nearest_row(points.row(r), centroids.data, centroids.cols);
    assignment[r] = nearest.index;
    dist2[r] = nearest.squared_distance;
    inertia += nearest.squared_distance;
  }
  return inertia;
}

// Moves the farthest point into each empty cluster. Returns true if anything
// moved. Centroids of repaired clusters become the moved point.
bool repair_empty(const Matrix& points, Matrix& centroids, std::vector<std::size_t>& assignment,
                  std::vector<double>& dist2) {
  const std::size_t k = centroids.rows;
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignment) ++sizes[a];
  bool changed = false;
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t far = points.rows;
    for (std::size_t r = 0; r < points.rows; ++r) {
      if (sizes[assignment[r]] <= 1) continue;  // never empty another cluster
      if (far == points.rows || dist2[r] > dist2[far]) far = r;
    }
    if (far == points.rows || dist2[far] == 0.0) continue;  // nothing to move
    --sizes[assignment[far]];
    assignment[far] = c;
    ++sizes[c];
    dist2[far] = 0.0;
    auto src = points.row(far);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
    changed = true;
  }
  return changed;
}

}  // namespace

Seeding kmeanspp_seed(const Matrix& points, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (k > points.rows) {
    throw Error(ErrorCode::kInvalidArgument,
                "k = " + std::to_string(k) + " exceeds point count " + std::to_string(points.rows));
  }
  Rng rng(seed);
  const std::size_t first = rng.uniform_index(points.rows);
  return kmeanspp_seed_from(points, first, k, rng.next_u64());
}

Seeding kmeanspp_seed_from(const Matrix& points, std::size_t first, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (k > points.rows) {
    throw Error(ErrorCode::kInvalidArgument,
                "k = " + std::to_string(k) + " exceeds point count " + std::to_string(points.rows));
  }
  check_points(points);
  Rng rng(seed);
  const std::size_t n = points.rows;
  Seeding s;
  s.indices.push_back(first);
  std::vector<bool> chosen(n, false);
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t r = 0; r < n; ++r) d2[r] = simd::squared_distance(points.row(r), points.row(first));

  while (s.indices.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (d2[r] == 0.0) continue;
        acc += d2[r];
        pick = r;
        if (acc > target) break;
      }
    } else {
      std::vector<std::size_t> open;
      for (std::size_t r = 0; r < n; ++r) {
        if (!chosen[r]) open.push_back(r);
      }
      pick = open[rng.uniform_index(open.size())];
    }
    chosen[pick] = true;
    s.indices.push_back(pick);
    for (std::size_t r = 0; r < n; ++r) {
      d2[r] = std::min(d2[r], simd::squared_distance(points.row(r), points.row(pick)));
    }
  }

  s.centroids = select_rows(points, s.indices);
  return s;
}

double compute_inertia(const Matrix& points, const Matrix& centroids, const std::vector<std::size_t>& assignment) {
  double inertia = 0.0;
  for (std::size_t r = 0; r < points.rows; ++r) {
    inertia += simd::squared_distance(points.row(r), centroids.row(assignment[r]));
  }
  return inertia;
}

Clustering lloyd(const Matrix& points, const Matrix& init_centroids, const LloydOptions& options) {
  if (init_centroids.rows == 0) throw Error(ErrorCode::kInvalidArgument, "no initial centroids");
  if (init_centroids.cols != points.cols) throw Error(ErrorCode::kInvalidArgument, "centroid dimension mismatch");
  if (points.rows == 0) throw Error(ErrorCode::kInvalidArgument, "no points to cluster");
  check_points(points);
  check_points(init_centroids);

  const std::size_t n = points.rows;
  const std::size_t k = init_centroids.rows;
  const std::size_t dim = points.cols;

  Clustering c;
  c.k = k;
  c.centroids = init_centroids;
  c.assignment.assign(n, 0);
  std::vector<double> dist2(n, 0.0);
  c.inertia_trace.push_back(assign(points, c.centroids, c.assignment, dist2));

  Matrix sums(k, dim);
  std::vector<std::size_t> sizes(k);
  while (c.iterations < options.max_iter) {
    if (repair_empty(points, c.centroids, c.assignment, dist2)) {
      double inertia = 0.0;
      for (double v : dist2) inertia += v;
      c.inertia_trace.back() = std::min(c.inertia_trace.back(), inertia);
    }

    std::fill(sums.data.begin(), sums.data.end(), 0.0);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      auto dst = sums.row(c.assignment[r]);
      auto src = points.row(r);
      for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
      ++sizes[c.assignment[r]];
    }
    double max_shift2 = 0.0;
    for (std::size_t cl = 0; cl < k; ++cl) {
      if (sizes[cl] == 0) continue;  // unrepairable (duplicate points); keep centroid
      auto centroid = c.centroids.row(cl);
      auto sum = sums.row(cl);
      const double inv = 1.0 / static_cast<double>(sizes[cl]);
      double shift2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double updated = sum[j] * inv;
        const double delta = updated - centroid[j];
        shift2 += delta * delta;
        centroid[j] = updated;
      }
      max_shift2 = std::max(max_shift2, shift2);
    }
    ++c.iterations;
    c.inertia_trace.push_back(assign(points, c.centroids, c.assignment, dist2));
    if (std::sqrt(max_shift2) < options.tol) break;
  }
  c.inertia = c.inertia_trace.back();
  return c;
}

void canonicalize(Clustering& c) {
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> first(c.k, none);
  for (std::size_t r = 0; r < c.assignment.size(); ++r) {
    first[c.assignment[r]] = std::min(first[c.assignment[r]], r);
  }
  std::vector<std::size_t> order(c.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });
  std::vector<std::size_t> new_index(c.k);
  Matrix centroids(c.k, c.centroids.cols);
  for (std::size_t i = 0; i < c.k; ++i) {
    new_index[order[i]] = i;
    auto src = c.centroids.row(order[i]);
    std::copy(src.begin(), src.end(), centroids.row(i).begin());
  }
  c.centroids = std::move(centroids);
  for (auto& a : c.assignment) a = new_index[a];
}

Clustering kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
                  const LloydOptions& options) {
  Clustering best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    const auto seeding = kmeanspp_seed(points, k, mix_seed(seed, r));
    auto c = lloyd(points, seeding.centroids, options);
    if (!have || c.inertia < best.inertia) {
      best = std::move(c);
      have = true;
    }
  }
  canonicalize(best);
  return best;
}

}  // namespace aa
