#pragma once

#include <cstddef>
#include <vector>

#include "aa/common/matrix.hpp"
#include "aa/embedding.hpp"

namespace aa {

struct PcaModel {
  std::vector<double> mean;               // length d
  Matrix components;                      // p x d, orthonormal rows
  std::vector<double> explained_variance; // length p, non-increasing
  double total_variance = 0.0;            // trace of the sample covariance

  std::size_t input_dim() const { return mean.size(); }
  std::size_t output_dim() const { return components.rows; }
};

// Full eigendecomposition of the sample covariance (divisor n - 1). Eigenpairs
// are sorted by descending eigenvalue; each eigenvector is oriented so its
// largest-magnitude coordinate is positive (first such coordinate on ties).
struct CovarianceSpectrum {
  std::vector<double> mean;
  std::vector<double> eigenvalues;
  Matrix eigenvectors;  // d x d, row i pairs with eigenvalues[i]
};

CovarianceSpectrum covariance_spectrum(const Matrix& data);

// Top-p principal directions. Requires n >= 2, 1 <= p <= min(d, n), finite data.
PcaModel fit_pca(const EmbeddingMatrix& e, std::size_t p);

// Smallest p whose cumulative explained variance reaches `variance_fraction`
// of the total, capped at `max_components` and min(d, n).
std::size_t choose_components(const CovarianceSpectrum& spectrum, std::size_t n, double variance_fraction,
                              std::size_t max_components);

PcaModel fit_pca_auto(const EmbeddingMatrix& e, double variance_fraction, std::size_t max_components);

// Row-wise components * (x - mean). Throws on dimension mismatch.
EmbeddingMatrix transform(const PcaModel& model, const EmbeddingMatrix& e);

// Maps reduced coordinates back to the input space.
Matrix reconstruct(const PcaModel& model, const Matrix& reduced);

}  // namespace aa
