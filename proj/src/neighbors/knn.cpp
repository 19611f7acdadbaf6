#include <algorithm>
#include <limits>
#include <unordered_set>

#include "aa/common/error.hpp"
#include "aa/neighbors.hpp"
#include "aa/simd/kernels.hpp"

namespace aa {

std::vector<std::size_t> knn_to_pivots(const Matrix& points, std::span<const std::string> ids,
                                       std::span<const std::size_t> pivots, std::span<const std::size_t> candidates,
                                       std::size_t count) {
  if (pivots.empty()) throw Error(ErrorCode::kInvalidArgument, "pivot set is empty");
  const std::unordered_set<std::size_t> pivot_set(pivots.begin(), pivots.end());

  struct Scored {
    double d2;
    std::size_t row;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (std::size_t row : candidates) {
    if (pivot_set.contains(row)) {
      throw Error(ErrorCode::kInvalidArgument, "pivot '" + ids[row] + "' is also a candidate");
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p : pivots) best = std::min(best, simd::squared_distance(points.row(row), points.row(p)));
    scored.push_back({best, row});
  }

  const auto less = [&](const Scored& a, const Scored& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return ids[a.row] < ids[b.row];
  };
  const std::size_t take = std::min(count, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), less);

  std::vector<std::size_t> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].row);
  return out;
}

}  // namespace aa
