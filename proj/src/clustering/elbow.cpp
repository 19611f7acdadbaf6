#include <algorithm>
#include <cmath>

#include "aa/clustering.hpp"
#include "aa/common/error.hpp"
#include "aa/common/rng.hpp"

namespace aa {

ElbowPick select_elbow(const std::vector<std::size_t>& ks, const std::vector<double>& sse) {
  if (ks.empty() || ks.size() != sse.size()) throw Error(ErrorCode::kInvalidArgument, "elbow curve is empty or ragged");
  const auto [lo_it, hi_it] = std::minmax_element(sse.begin(), sse.end());
  const double lo = *lo_it;
  const double span_y = *hi_it - lo;
  const double span_x = static_cast<double>(ks.back()) - static_cast<double>(ks.front());
  if (span_y <= 0.0 || span_x <= 0.0) return {ks.front(), true};

  const auto x = [&](std::size_t i) { return (static_cast<double>(ks[i]) - static_cast<double>(ks.front())) / span_x; };
  const auto y = [&](std::size_t i) { return (sse[i] - lo) / span_y; };

  // Line through (0, y0) and (1, y1): (y1 - y0) * x - y + y0 = 0.
  const double y0 = y(0);
  const double slope = y(ks.size() - 1) - y0;
  const double norm = std::sqrt(slope * slope + 1.0);
  std::size_t best = 0;
  double best_dist = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double dist = std::abs(slope * x(i) - y(i) + y0) / norm;
    if (dist > best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  if (best_dist <= 1e-12) return {ks.front(), true};
  return {ks[best], false};
}

ElbowResult elbow_select_k(const Matrix& points, std::uint64_t seed, const ElbowOptions& options) {
  const std::size_t n = points.rows;
  if (n == 0) throw Error(ErrorCode::kPrecondition, "no points to cluster");
  if (options.k_min == 0) throw Error(ErrorCode::kInvalidArgument, "k_min must be positive");
  const std::size_t k_max = std::min(options.k_max, n > 0 ? n - 1 : 0);

  ElbowResult result;
  if (k_max <= options.k_min) {
    result.selected_k = std::min(options.k_min, n);
    result.no_elbow = true;
    result.ks.push_back(result.selected_k);
    result.best = kmeans(points, result.selected_k, mix_seed(seed, result.selected_k), options.seeds_per_k,
                         options.lloyd);
    result.sse.push_back(result.best.inertia);
    return result;
  }

  std::vector<Clustering> runs;
  for (std::size_t k = options.k_min; k <= k_max; ++k) {
    runs.push_back(kmeans(points, k, mix_seed(seed, k), options.seeds_per_k, options.lloyd));
    result.ks.push_back(k);
    result.sse.push_back(runs.back().inertia);
  }
  const auto pick = select_elbow(result.ks, result.sse);
  result.selected_k = pick.k;
  result.no_elbow = pick.no_elbow;
  result.best = std::move(runs[pick.k - options.k_min]);
  return result;
}

}  // namespace aa
