#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aa {

// Dense row-major matrix of doubles. Rows are the unit of access everywhere
// in the pipeline (one row per utterance or centroid).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

// Gathers the given rows into a new matrix, preserving order.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

bool all_finite(const Matrix& m);

}  // namespace aa
