#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "aa/common/error.hpp"
#include "aa/dimred.hpp"
#include "aa/simd/kernels.hpp"

namespace aa {

namespace {

PcaModel model_from(const CovarianceSpectrum& s, std::size_t p) {
  const std::size_t d = s.mean.size();
  PcaModel m;
  m.mean = s.mean;
  m.components = Matrix(p, d);
  for (std::size_t i = 0; i < p; ++i) {
    auto src = s.eigenvectors.row(i);
    std::copy(src.begin(), src.end(), m.components.row(i).begin());
    m.explained_variance.push_back(s.eigenvalues[i]);
  }
  for (double v : s.eigenvalues) m.total_variance += v;
  return m;
}

void check_input(const Matrix& data) {
  if (data.rows < 2) throw Error(ErrorCode::kPrecondition, "PCA needs at least 2 points");
  if (data.cols == 0) throw Error(ErrorCode::kPrecondition, "PCA needs dimension >= 1");
  if (!all_finite(data)) throw Error(ErrorCode::kInvalidArgument, "PCA input contains non-finite values");
}

}  // namespace

CovarianceSpectrum covariance_spectrum(const Matrix& data) {
  check_input(data);
  const auto n = static_cast<Eigen::Index>(data.rows);
  const auto d = static_cast<Eigen::Index>(data.cols);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> x(data.data.data(), n, d);

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(n - 1));
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::kPrecondition, "covariance eigendecomposition failed");

  CovarianceSpectrum out;
  out.mean.assign(mean.data(), mean.data() + d);
  out.eigenvectors = Matrix(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  // Eigen returns ascending eigenvalues.
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index src = d - 1 - i;
    out.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()(src)));
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < d; ++j) {
      if (std::abs(v(j)) > std::abs(v(arg))) arg = j;
    }
    if (v(arg) < 0) v = -v;
    auto row = out.eigenvectors.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < d; ++j) row[static_cast<std::size_t>(j)] = v(j);
  }
  return out;
}

PcaModel fit_pca(const EmbeddingMatrix& e, std::size_t p) {
  check_input(e.vectors);
  const std::size_t limit = std::min(e.vectors.rows, e.vectors.cols);
  if (p == 0 || p > limit) {
    throw Error(ErrorCode::kInvalidArgument,
                "component count " + std::to_string(p) + " outside [1, " + std::to_string(limit) + "]");
  }
  return model_from(covariance_spectrum(e.vectors), p);
}

std::size_t choose_components(const CovarianceSpectrum& spectrum, std::size_t n, double variance_fraction,
                              std::size_t max_components) {
  const std::size_t limit = std::max<std::size_t>(1, std::min({spectrum.eigenvalues.size(), n, max_components}));
  double total = 0.0;
  for (double v : spectrum.eigenvalues) total += v;
  if (total <= 0.0) return 1;
  double cumulative = 0.0;
  for (std::size_t p = 1; p <= limit; ++p) {
    cumulative += spectrum.eigenvalues[p - 1];
    if (cumulative >= variance_fraction * total) return p;
  }
  return limit;
}

PcaModel fit_pca_auto(const EmbeddingMatrix& e, double variance_fraction, std::size_t max_components) {
  auto spectrum = covariance_spectrum(e.vectors);
  const std::size_t p = choose_components(spectrum, e.vectors.rows, variance_fraction, max_components);
  return model_from(spectrum, p);
}

EmbeddingMatrix transform(const PcaModel& model, const EmbeddingMatrix& e) {
  const std::size_t d = model.input_dim();
  if (e.vectors.cols != d) {
    throw Error(ErrorCode::kInvalidArgument, "input dimension " + std::to_string(e.vectors.cols) +
                                                 " does not match model dimension " + std::to_string(d));
  }
  const std::size_t p = model.output_dim();
  EmbeddingMatrix out;
  out.ids = e.ids;
  out.zero_rows = e.zero_rows;
  out.vectors = Matrix(e.vectors.rows, p);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < e.vectors.rows; ++r) {
    auto x = e.vectors.row(r);
    for (std::size_t j = 0; j < d; ++j) centered[j] = x[j] - model.mean[j];
    auto y = out.vectors.row(r);
    for (std::size_t c = 0; c < p; ++c) y[c] = simd::dot(model.components.row(c), centered);
  }
  return out;
}

Matrix reconstruct(const PcaModel& model, const Matrix& reduced) {
  const std::size_t d = model.input_dim();
  Matrix out(reduced.rows, d);
  for (std::size_t r = 0; r < reduced.rows; ++r) {
    auto y = out.row(r);
    std::copy(model.mean.begin(), model.mean.end(), y.begin());
    for (std::size_t c = 0; c < reduced.cols; ++c) {
      const double coef = reduced(r, c);
      auto comp = model.components.row(c);
      for (std::size_t j = 0; j < d; ++j) y[j] += coef * comp[j];
    }
  }
  return out;
}

}  // namespace aa
