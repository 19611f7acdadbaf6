#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace aa::oracle {

Eigen jacobi_eigen(const Matrix& symmetric, double tol, std::size_t max_sweeps) {
  const std::size_t n = symmetric.rows;
  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += a(i, i) * a(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off <= tol * tol * std::max(diag, 1e-300)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  Eigen out;
  out.vectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values.push_back(a(order[i], order[i]));
    for (std::size_t k = 0; k < n; ++k) out.vectors(i, k) = v(k, order[i]);
  }
  return out;
}

Matrix covariance(const Matrix& data) {
  const std::size_t n = data.rows, d = data.cols;
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += data(i, j);
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  Matrix c(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) c(a, b) += (data(i, a) - mean[a]) * (data(i, b) - mean[b]);
    }
  }
  for (auto& x : c.data) x /= static_cast<double>(n - 1);
  return c;
}

Matrix principal_directions(const Matrix& data, std::size_t p) {
  const auto e = jacobi_eigen(covariance(data));
  Matrix out(p, data.cols);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < data.cols; ++j) out(i, j) = e.vectors(i, j);
  }
  return out;
}

double max_principal_angle(const Matrix& a, const Matrix& b) {
  const std::size_t p = a.rows;
  // M = A B^T; singular values of M are the cosines of the principal angles.
  Matrix m(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
      m(i, j) = s;
    }
  }
  // sin^2 of the angles are the eigenvalues of I - M^T M; computing them
  // directly avoids the cancellation in acos near 1.
  Matrix g(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) s += m(k, i) * m(k, j);
      g(i, j) = (i == j ? 1.0 : 0.0) - s;
    }
  }
  const auto e = jacobi_eigen(g);
  const double sin2 = std::max(0.0, e.values.front());
  return std::asin(std::min(1.0, std::sqrt(sin2)));
}

std::vector<std::size_t> knn_exhaustive(const Matrix& points, const std::vector<std::string>& ids,
                                        const std::vector<std::size_t>& pivots,
                                        const std::vector<std::size_t>& candidates, std::size_t count) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (auto c : candidates) {
    double best = INFINITY;
    for (auto p : pivots) {
      double s = 0.0;
      for (std::size_t j = 0; j < points.cols; ++j) {
        const double diff = points(c, j) - points(p, j);
        s += diff * diff;
      }
      best = std::min(best, s);
    }
    scored.emplace_back(best, c);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return ids[x.second] < ids[y.second];
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scored.size() && i < count; ++i) out.push_back(scored[i].second);
  return out;
}

std::size_t elbow_brute_force(const std::vector<std::size_t>& ks, const std::vector<double>& sse) {
  const double y_max = *std::max_element(sse.begin(), sse.end());
  const double y_min = *std::min_element(sse.begin(), sse.end());
  if (y_max == y_min || ks.size() < 2) return 0;
  const double x_span = static_cast<double>(ks.back() - ks.front());
  const auto px = [&](std::size_t i) { return static_cast<double>(ks[i] - ks.front()) / x_span; };
  const auto py = [&](std::size_t i) { return (sse[i] - y_min) / (y_max - y_min); };
  const double ax = px(0), ay = py(0), bx = px(ks.size() - 1), by = py(ks.size() - 1);
  const double chord = std::hypot(bx - ax, by - ay);
  std::size_t best_k = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double twice_area = std::abs((bx - ax) * (ay - py(i)) - (ax - px(i)) * (by - ay));
    const double dist = twice_area / chord;
    if (dist > best + 1e-12) {
      best = dist;
      best_k = ks[i];
    }
  }
  return best_k;
}

double kappa_exact(const std::vector<std::vector<long long>>& t) {
  const std::size_t q = t.size();
  long long n = 0, agree = 0, chance = 0;
  std::vector<long long> rows(q, 0), cols(q, 0);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      n += t[i][j];
      rows[i] += t[i][j];
      cols[j] += t[i][j];
    }
    agree += t[i][i];
  }
  for (std::size_t i = 0; i < q; ++i) chance += rows[i] * cols[i];
  return static_cast<double>(n * agree - chance) / static_cast<double>(n * n - chance);
}

Matrix random_normal(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  for (auto& x : m.data) {
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    x = scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return m;
}

}  // namespace aa::oracle
