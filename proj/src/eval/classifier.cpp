#include <cmath>
#include <limits>
#include <map>

#include "aa/common/error.hpp"
#include "aa/common/rng.hpp"
#include "aa/eval.hpp"
#include "aa/simd/kernels.hpp"

namespace aa::eval {

CentroidClassifier::CentroidClassifier(const Matrix& points, std::span<const std::string> labels) {
  if (points.rows != labels.size()) throw Error(ErrorCode::kInvalidArgument, "one label per training row required");
  if (points.rows == 0) throw Error(ErrorCode::kPrecondition, "no labelled data");
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  centroids_ = Matrix(by_class.size(), points.cols);
  std::size_t c = 0;
  for (const auto& [label, rows] : by_class) {
    classes_.push_back(label);
    auto out = centroids_.row(c);
    for (auto r : rows) {
      const auto x = points.row(r);
      for (std::size_t j = 0; j < points.cols; ++j) out[j] += x[j];
    }
    for (auto& v : out) v /= static_cast<double>(rows.size());
    norms_.push_back(std::sqrt(simd::dot(out, out)));
    ++c;
  }
}

std::string CentroidClassifier::predict(std::span<const double> x) const {
  if (x.size() != centroids_.cols) throw Error(ErrorCode::kInvalidArgument, "dimension mismatch");
  const double xn = std::sqrt(simd::dot(x, x));
  std::size_t best = 0;
  double best_sim = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const double denom = xn * norms_[c];
    const double sim = denom > 0.0 ? simd::dot(x, centroids_.row(c)) / denom : 0.0;
    // classes_ is sorted, so strict > keeps the smallest label on ties.
    if (sim > best_sim) {
      best_sim = sim;
      best = c;
    }
  }
  return classes_[best];
}

double centroid_classifier_train_eval(const Matrix& train, std::span<const std::string> train_labels,
                                      const Matrix& test, std::span<const std::string> test_labels) {
  if (test.rows != test_labels.size()) throw Error(ErrorCode::kInvalidArgument, "one label per test row required");
  CentroidClassifier clf(train, train_labels);
  std::vector<std::string> predicted;
  predicted.reserve(test.rows);
  for (std::size_t i = 0; i < test.rows; ++i) predicted.push_back(clf.predict(test.row(i)));
  return macro_f1(predicted, test_labels);
}

std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t next = 0;
  for (auto& [label, rows] : by_class) {
    rng.shuffle(rows);
    for (auto r : rows) fold[r] = next++ % folds;
  }
  return fold;
}

double stratified_cv_f1(const Matrix& points, std::span<const std::string> labels, std::size_t folds,
                        std::uint64_t seed) {
  if (points.rows != labels.size()) throw Error(ErrorCode::kInvalidArgument, "one label per row required");
  const auto assignment = stratified_folds(labels, folds, seed);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    std::vector<std::string> train_labels, test_labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (assignment[i] == f) {
        test_rows.push_back(i);
        test_labels.push_back(labels[i]);
      } else {
        train_rows.push_back(i);
        train_labels.push_back(labels[i]);
      }
    }
    if (train_rows.empty() || test_rows.empty()) continue;
    sum += centroid_classifier_train_eval(select_rows(points, train_rows), train_labels, select_rows(points, test_rows),
                                          test_labels);
    ++used;
  }
  return used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace aa::eval
