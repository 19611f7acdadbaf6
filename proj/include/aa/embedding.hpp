#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aa/common/matrix.hpp"

namespace aa {

struct Utterance {
  std::string id;
  std::string text;
  std::optional<std::string> gold_label;  // evaluation only

  bool operator==(const Utterance&) const = default;
};

// Utterances in file order with an id index.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Utterance> items);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Utterance& operator[](std::size_t row) const { return items_[row]; }
  const std::vector<Utterance>& items() const { return items_; }

  std::optional<std::size_t> row_of(const std::string& id) const;
  bool has_gold() const;

 private:
  std::vector<Utterance> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// JSONL with "id", "text" and optional "gold_label" per line. Blank lines are
// ignored. Throws Error(kParse) naming the 1-based line on malformed or
// duplicate rows, and on an empty input.
Dataset parse_dataset(std::istream& in);
Dataset ingest_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const Dataset& dataset);

struct EmbeddingMatrix {
  std::vector<std::string> ids;
  Matrix vectors;
  // Rows whose text produced no usable token; their vector is all zeros.
  std::vector<std::size_t> zero_rows;

  std::size_t dim() const { return vectors.cols; }
};

using StopwordSet = std::unordered_set<std::string>;

struct EmbedderSpec {
  enum class Kind { kBuiltinHashTfidf, kPrecomputedFile };

  Kind kind = Kind::kBuiltinHashTfidf;
  std::size_t dim = 512;
  std::filesystem::path path;
  // Tokens dropped by the builtin embedder before hashing; null keeps all.
  std::shared_ptr<const StopwordSet> stopwords;
};

// Stable 64-bit FNV-1a; the builtin embedder's bucket hash.
std::uint64_t fnv1a64(std::string_view s);

EmbeddingMatrix embed(const Dataset& dataset, const EmbedderSpec& spec);

// Builtin hashed TF-IDF: tf is the raw count of a bucket in the document,
// idf = ln((1 + n) / (1 + df)) + 1 with df counted per bucket, rows
// L2-normalized.
EmbeddingMatrix embed_hashed_tfidf(const Dataset& dataset, std::size_t dim, const StopwordSet* stopwords);

// Loads "id"/"vector" JSONL and reorders to the dataset's row order.
EmbeddingMatrix load_precomputed(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace aa
