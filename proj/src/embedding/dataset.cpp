#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aa/common/error.hpp"
#include "aa/common/text.hpp"
#include "aa/embedding.hpp"

namespace aa {

using nlohmann::json;

Dataset::Dataset(std::vector<Utterance> items) : items_(std::move(items)) {
  index_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate id '" + items_[i].id + "'");
    }
  }
}

std::optional<std::size_t> Dataset::row_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Dataset::has_gold() const {
  for (const auto& u : items_) {
    if (!u.gold_label) return false;
  }
  return !items_.empty();
}

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

Dataset parse_dataset(std::istream& in) {
  std::vector<Utterance> items;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error&) {
      fail_line(line_no, "malformed JSON");
    }
    if (!row.is_object()) fail_line(line_no, "expected a JSON object");
    if (!row.contains("id") || !row["id"].is_string()) fail_line(line_no, "missing string field \"id\"");
    if (!row.contains("text") || !row["text"].is_string()) fail_line(line_no, "missing string field \"text\"");
    Utterance u;
    u.id = row["id"].get<std::string>();
    u.text = row["text"].get<std::string>();
    if (u.id.empty()) fail_line(line_no, "empty id");
    if (text::trim(u.text).empty()) fail_line(line_no, "empty text for id '" + u.id + "'");
    if (row.contains("gold_label") && !row["gold_label"].is_null()) {
      if (!row["gold_label"].is_string()) fail_line(line_no, "\"gold_label\" must be a string");
      u.gold_label = row["gold_label"].get<std::string>();
    }
    auto [it, fresh] = first_seen.emplace(u.id, line_no);
    if (!fresh) {
      fail_line(line_no, "duplicate id '" + u.id + "' (first seen on line " + std::to_string(it->second) + ")");
    }
    items.push_back(std::move(u));
  }
  if (items.empty()) throw Error(ErrorCode::kParse, "dataset is empty");
  return Dataset(std::move(items));
}

Dataset ingest_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset " + path.string());
  return parse_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const auto& u : dataset.items()) {
    nlohmann::ordered_json row = {{"id", u.id}, {"text", u.text}};
    if (u.gold_label) row["gold_label"] = *u.gold_label;
    out << row.dump() << '\n';
  }
}

}  // namespace aa
