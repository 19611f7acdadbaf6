#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "aa/common/error.hpp"
#include "aa/common/text.hpp"
#include "aa/embedding.hpp"

namespace aa {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingMatrix embed(const Dataset& dataset, const EmbedderSpec& spec) {
  if (dataset.empty()) throw Error(ErrorCode::kPrecondition, "cannot embed an empty dataset");
  switch (spec.kind) {
    case EmbedderSpec::Kind::kBuiltinHashTfidf:
      return embed_hashed_tfidf(dataset, spec.dim, spec.stopwords.get());
    case EmbedderSpec::Kind::kPrecomputedFile:
      return load_precomputed(dataset, spec.path);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown embedder kind");
}

EmbeddingMatrix embed_hashed_tfidf(const Dataset& dataset, std::size_t dim, const StopwordSet* stopwords) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be positive");
  const std::size_t n = dataset.size();

  // Sparse bucket counts per document; std::map keeps accumulation order fixed.
  std::vector<std::map<std::size_t, double>> counts(n);
  std::vector<std::size_t> df(dim, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& tok : text::word_tokens(dataset[r].text)) {
      if (stopwords != nullptr && stopwords->contains(tok)) continue;
      counts[r][fnv1a64(tok) % dim] += 1.0;
    }
    for (const auto& [bucket, c] : counts[r]) ++df[bucket];
  }

  EmbeddingMatrix out;
  out.vectors = Matrix(n, dim);
  out.ids.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.ids.push_back(dataset[r].id);
    auto row = out.vectors.row(r);
    double norm2 = 0.0;
    for (const auto& [bucket, tf] : counts[r]) {
      const double idf = std::log((1.0 + static_cast<double>(n)) / (1.0 + static_cast<double>(df[bucket]))) + 1.0;
      row[bucket] = tf * idf;
      norm2 += row[bucket] * row[bucket];
    }
    if (norm2 == 0.0) {
      out.zero_rows.push_back(r);
      continue;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (const auto& [bucket, tf] : counts[r]) row[bucket] *= inv;
  }
  return out;
}

EmbeddingMatrix load_precomputed(const Dataset& dataset, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open precomputed embeddings " + path.string());

  std::unordered_map<std::string, std::vector<double>> by_id;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": malformed JSON");
    }
    if (!row.is_object() || !row.contains("id") || !row["id"].is_string() || !row.contains("vector") ||
        !row["vector"].is_array()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected {\"id\", \"vector\"}");
    }
    std::vector<double> v;
    v.reserve(row["vector"].size());
    for (const auto& x : row["vector"]) {
      if (!x.is_number()) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": non-numeric vector entry");
      const double value = x.get<double>();
      if (!std::isfinite(value)) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": non-finite vector entry");
      v.push_back(value);
    }
    if (v.empty()) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": empty vector");
    if (dim == 0) {
      dim = v.size();
    } else if (v.size() != dim) {
      throw Error(ErrorCode::kInvalidArgument, "line " + std::to_string(line_no) + ": dimension " +
                                                   std::to_string(v.size()) + " differs from " + std::to_string(dim));
    }
    const auto id = row["id"].get<std::string>();
    if (!by_id.emplace(id, std::move(v)).second) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
    }
  }

  EmbeddingMatrix out;
  out.vectors = Matrix(dataset.size(), dim);
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto& id = dataset[r].id;
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::kNotFound, "no precomputed vector for id '" + id + "'");
    out.ids.push_back(id);
    std::copy(it->second.begin(), it->second.end(), out.vectors.row(r).begin());
    bool zero = true;
    for (double x : it->second) zero = zero && x == 0.0;
    if (zero) out.zero_rows.push_back(r);
  }
  return out;
}

}  // namespace aa
