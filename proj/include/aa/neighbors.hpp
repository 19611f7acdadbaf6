#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aa/common/matrix.hpp"

namespace aa {

// Exact nearest-neighbour proposals for a pivot set.
//
// Candidates (row indices into `points`) are ranked ascending by the minimum
// squared Euclidean distance to any pivot, ties broken by id ascending, and
// the first `count` are returned (all of them if fewer). `ids` is indexed by
// row. Throws on an empty pivot set or a pivot that is also a candidate.
std::vector<std::size_t> knn_to_pivots(const Matrix& points, std::span<const std::string> ids,
                                       std::span<const std::size_t> pivots, std::span<const std::size_t> candidates,
                                       std::size_t count);

}  // namespace aa
