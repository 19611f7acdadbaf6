#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include "aa/common/error.hpp"
#include "aa/common/text.hpp"
#include "aa/labeling.hpp"

namespace aa::labeling {

const char* tag_name(Tag t) {
  switch (t) {
    case Tag::kVerb: return "VERB";
    case Tag::kNoun: return "NOUN";
    case Tag::kPron: return "PRON";
    case Tag::kOther: return "OTHER";
  }
  return "OTHER";
}

bool Resources::has_reading(const std::string& word, Tag t) const {
  auto it = lexicon.find(word);
  if (it == lexicon.end()) return false;
  for (Tag r : it->second) {
    if (r == t) return true;
  }
  return false;
}

namespace {

std::ifstream open_data(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

bool skip_line(const std::string& line) {
  const auto t = text::trim(line);
  return t.empty() || t.front() == '#';
}

Tag parse_tag(const std::string& s, const std::filesystem::path& path, std::size_t line_no) {
  if (s == "VERB") return Tag::kVerb;
  if (s == "NOUN") return Tag::kNoun;
  if (s == "PRON") return Tag::kPron;
  if (s == "OTHER") return Tag::kOther;
  throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) + ": unknown tag '" + s + "'");
}

}  // namespace

Resources Resources::load(const std::filesystem::path& dir) {
  Resources res;
  {
    const auto path = dir / "pos_lexicon.tsv";
    auto in = open_data(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (skip_line(line)) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) + ": missing tab");
      std::vector<Tag> tags;
      std::istringstream readings(line.substr(tab + 1));
      std::string tag;
      while (std::getline(readings, tag, '|')) tags.push_back(parse_tag(text::trim(tag), path, line_no));
      res.lexicon[line.substr(0, tab)] = std::move(tags);
    }
  }
  {
    const auto path = dir / "irregular.tsv";
    auto in = open_data(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (skip_line(line)) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) + ": missing tab");
      res.irregular.emplace(line.substr(0, tab), text::trim(line.substr(tab + 1)));
    }
  }
  {
    auto in = open_data(dir / "stopwords.txt");
    auto words = std::make_shared<StopwordSet>();
    std::string line;
    while (std::getline(in, line)) {
      if (skip_line(line)) continue;
      words->insert(text::trim(line));
    }
    res.stopwords = std::move(words);
  }
  return res;
}

std::filesystem::path default_resource_dir() {
  if (const char* env = std::getenv("AA_RESOURCE_DIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::path(AA_DEFAULT_DATA_DIR) / "lexicon";
}

const Resources& default_resources() {
  static const Resources res = Resources::load(default_resource_dir());
  return res;
}

}  // namespace aa::labeling
