#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "aa/common/error.hpp"
#include "aa/eval.hpp"

namespace aa::eval {

namespace {

void check_aligned(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::kInvalidArgument, "labelings differ in length");
  if (a == 0) throw Error(ErrorCode::kInvalidArgument, "labelings are empty");
}

}  // namespace

double cohens_kappa(const std::vector<std::vector<double>>& table) {
  const std::size_t k = table.size();
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "contingency table is empty");
  std::vector<double> row_sum(k, 0.0), col_sum(k, 0.0);
  double n = 0.0, agree = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (table[i].size() != k) throw Error(ErrorCode::kInvalidArgument, "contingency table is not square");
    for (std::size_t j = 0; j < k; ++j) {
      const double v = table[i][j];
      if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "contingency counts must be non-negative");
      row_sum[i] += v;
      col_sum[j] += v;
      n += v;
    }
    agree += table[i][i];
  }
  if (n <= 0.0) throw Error(ErrorCode::kInvalidArgument, "contingency table has no observations");
  const double p_o = agree / n;
  double p_e = 0.0;
  for (std::size_t i = 0; i < k; ++i) p_e += (row_sum[i] / n) * (col_sum[i] / n);
  if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  return (p_o - p_e) / (1.0 - p_e);
}

double cohens_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  check_aligned(a.size(), b.size());
  std::map<std::string, std::size_t> index;
  for (const auto& l : a) index.emplace(l, 0);
  for (const auto& l : b) index.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, i] : index) i = next++;
  std::vector<std::vector<double>> table(index.size(), std::vector<double>(index.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) table[index[a[i]]][index[b[i]]] += 1.0;
  return cohens_kappa(table);
}

std::vector<ClassScore> per_class_scores(std::span<const std::string> predicted, std::span<const std::string> gold) {
  check_aligned(predicted.size(), gold.size());
  std::map<std::string, std::size_t> tp, fp, fn;
  std::set<std::string> classes(gold.begin(), gold.end());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] == gold[i]) {
      ++tp[gold[i]];
    } else {
      ++fn[gold[i]];
      ++fp[predicted[i]];
    }
  }
  std::vector<ClassScore> out;
  for (const auto& c : classes) {
    ClassScore s;
    s.label = c;
    const double t = static_cast<double>(tp[c]);
    s.support = tp[c] + fn[c];
    s.precision = tp[c] + fp[c] > 0 ? t / static_cast<double>(tp[c] + fp[c]) : 0.0;
    s.recall = s.support > 0 ? t / static_cast<double>(s.support) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

double macro_f1(std::span<const std::string> predicted, std::span<const std::string> gold) {
  const auto scores = per_class_scores(predicted, gold);
  double sum = 0.0;
  for (const auto& s : scores) sum += s.f1;
  return sum / static_cast<double>(scores.size());
}

std::optional<std::string> LabelMapping::apply(const std::string& label) const {
  auto it = table.find(label);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> LabelMapping::unmapped() const {
  std::vector<std::string> out;
  for (const auto& [label, target] : table) {
    if (!target) out.push_back(label);
  }
  return out;
}

LabelMapping map_labels(std::span<const std::string> session, std::span<const std::string> gold,
                        const std::map<std::string, std::string>& overrides) {
  if (session.size() != gold.size()) throw Error(ErrorCode::kInvalidArgument, "labelings differ in length");
  std::map<std::string, std::map<std::string, std::size_t>> overlap;
  for (std::size_t i = 0; i < session.size(); ++i) ++overlap[session[i]][gold[i]];
  LabelMapping m;
  for (const auto& [label, counts] : overlap) {
    std::optional<std::string> best;
    std::size_t best_count = 0;
    for (const auto& [g, c] : counts) {
      if (c > best_count) {
        best = g;
        best_count = c;
      }
    }
    m.table[label] = best;
  }
  for (const auto& [label, target] : overrides) m.table[label] = target;
  return m;
}

std::map<std::string, std::string> load_mapping_overrides(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open mapping file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    return j.get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kParse, "mapping file '" + path.string() + "': expected an object of strings");
  }
}

}  // namespace aa::eval
