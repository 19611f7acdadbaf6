#include <array>
#include <unordered_set>

#include "aa/common/text.hpp"
#include "aa/labeling.hpp"

namespace aa::labeling {

namespace {

const std::unordered_set<std::string>& noun_context() {
  // A following VERB|NOUN word is read as a noun.
  static const std::unordered_set<std::string> words = {
      "a", "an", "the", "this", "that", "these", "those", "my", "your", "our", "his", "her", "their", "its",
      "some", "any", "no", "every", "each", "another", "which", "what", "whose", "for", "at", "in", "on",
      "with", "about", "of", "from", "by", "into", "onto", "one", "two", "three", "four", "five", "six",
      "seven", "eight", "nine", "ten", "first", "second", "third", "last", "next", "good", "great", "new",
      "later", "earlier", "different", "other", "same", "early", "late", "whole", "online", "'s", "movie",
      "ticket", "cinema", "theater", "theatre", "box", "front", "back"};
  return words;
}

const std::unordered_set<std::string>& verb_context() {
  // A following VERB|NOUN word is read as a verb.
  static const std::unordered_set<std::string> words = {
      "to", "please", "and", "or", "then", "just", "also", "not", "n't", "i", "you", "we", "they", "he",
      "she", "it", "can", "could", "will", "would", "should", "shall", "may", "might", "must", "'d", "'ll",
      "do", "does", "did", "let", "lets", "us", "me", "help", "gonna", "wanna", "still", "now", "quickly"};
  return words;
}

bool is_word_char(char32_t c) { return text::is_alnum(c); }

void push_word(std::vector<std::string>& out, std::u32string& word) {
  if (word.empty()) return;
  // Trim hyphens and apostrophes at the edges.
  std::size_t b = 0;
  std::size_t e = word.size();
  while (b < e && (word[b] == U'-' || word[b] == U'\'')) ++b;
  while (e > b && (word[e - 1] == U'-')) --e;
  std::u32string w = word.substr(b, e - b);
  word.clear();
  if (w.empty()) return;

  const auto apos = w.find(U'\'');
  if (apos == std::u32string::npos) {
    out.push_back(text::encode_utf8(w));
    return;
  }
  // n't contraction: "don't" -> "do" "n't", "can't" -> "ca" "n't".
  if (w.size() >= 3 && w.compare(w.size() - 3, 3, U"n't") == 0) {
    if (w.size() > 3) out.push_back(text::encode_utf8(w.substr(0, w.size() - 3)));
    out.push_back("n't");
    return;
  }
  const std::u32string head = w.substr(0, apos);
  const std::u32string tail = w.substr(apos);
  if (!head.empty()) out.push_back(text::encode_utf8(head));
  if (tail.size() > 1) out.push_back(text::encode_utf8(tail));
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Known verb stem behind an -ing/-ed form, or empty.
std::string verb_stem(const std::string& w, const Resources& res) {
  std::string stem;
  if (ends_with(w, "ing") && w.size() > 4) {
    stem = w.substr(0, w.size() - 3);
  } else if (ends_with(w, "ied") && w.size() > 4) {
    const auto y = w.substr(0, w.size() - 3) + "y";
    if (res.has_reading(y, Tag::kVerb)) return y;
    return {};
  } else if (ends_with(w, "ed") && w.size() > 3) {
    stem = w.substr(0, w.size() - 2);
  } else {
    return {};
  }
  if (res.has_reading(stem, Tag::kVerb)) return stem;
  if (res.has_reading(stem + "e", Tag::kVerb)) return stem + "e";
  if (stem.size() >= 3 && stem[stem.size() - 1] == stem[stem.size() - 2] && !is_vowel(stem.back())) {
    const auto undoubled = stem.substr(0, stem.size() - 1);
    if (res.has_reading(undoubled, Tag::kVerb)) return undoubled;
  }
  return {};
}

// Stem behind a plural / third-person -s form that the lexicon knows, or empty.
std::string s_stem(const std::string& w, const Resources& res) {
  if (w.size() <= 3 || !ends_with(w, "s")) return {};
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return {};
  if (ends_with(w, "ies") && w.size() > 4) {
    const auto y = w.substr(0, w.size() - 3) + "y";
    if (res.lexicon.contains(y)) return y;
  }
  if (ends_with(w, "es")) {
    const auto base = w.substr(0, w.size() - 2);
    if ((ends_with(base, "s") || ends_with(base, "x") || ends_with(base, "z") || ends_with(base, "ch") ||
         ends_with(base, "sh")) &&
        res.lexicon.contains(base)) {
      return base;
    }
  }
  const auto base = w.substr(0, w.size() - 1);
  if (res.lexicon.contains(base)) return base;
  return {};
}

const std::unordered_set<std::string>& question_aux() {
  static const std::unordered_set<std::string> words = {"do", "does", "did", "can", "could", "will", "would",
                                                        "should", "shall", "may", "might", "must"};
  return words;
}

bool starts_with_digit(const std::string& w) { return !w.empty() && w[0] >= '0' && w[0] <= '9'; }

std::vector<Tag> readings(const std::string& w, const Resources& res) {
  if (auto it = res.lexicon.find(w); it != res.lexicon.end()) return it->second;
  if (starts_with_digit(w)) return {Tag::kOther};
  if (auto it = res.irregular.find(w); it != res.irregular.end()) {
    if (auto lex = res.lexicon.find(it->second); lex != res.lexicon.end()) return lex->second;
  }
  if (!verb_stem(w, res).empty()) return {Tag::kVerb};
  if (const auto stem = s_stem(w, res); !stem.empty()) {
    auto r = res.lexicon.at(stem);
    // Only open-class readings inflect with -s.
    std::vector<Tag> open;
    for (Tag t : r) {
      if (t == Tag::kVerb || t == Tag::kNoun) open.push_back(t);
    }
    if (!open.empty()) return open;
  }
  return {Tag::kNoun};
}

}  // namespace

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> out;
  std::u32string word;
  for (char32_t c : text::decode_utf8(input)) {
    if (c == U'’' || c == U'`') c = U'\'';
    if (is_word_char(c)) {
      word.push_back(text::to_lower(c));
    } else if ((c == U'-' || c == U'\'') && !word.empty()) {
      word.push_back(c);
    } else if (c == U'\'' && word.empty()) {
      word.push_back(c);  // leading clitic such as "'ll" after a space
    } else {
      push_word(out, word);
    }
  }
  push_word(out, word);
  return out;
}

std::vector<TaggedToken> pos_tag(std::string_view text_in, const Resources& res) {
  const auto words = tokenize(text_in);
  std::vector<TaggedToken> out;
  out.reserve(words.size());
  // Set by a fronted auxiliary ("does the movie start"), cleared by the verb
  // it is waiting for.
  bool open_aux = false;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto r = readings(words[i], res);
    Tag tag = r.front();
    const bool ambiguous = r.size() > 1 && ((r[0] == Tag::kVerb && r[1] == Tag::kNoun) ||
                                            (r[0] == Tag::kNoun && r[1] == Tag::kVerb));
    if (ambiguous) {
      if (i == 0) {
        tag = Tag::kVerb;
      } else {
        const auto& prev = words[i - 1];
        const Tag prev_tag = out.back().tag;
        if (open_aux && prev_tag == Tag::kNoun) {
          tag = Tag::kVerb;
        } else if (noun_context().contains(prev) || starts_with_digit(prev)) {
          tag = Tag::kNoun;
        } else if (verb_context().contains(prev) || prev_tag == Tag::kPron) {
          tag = Tag::kVerb;
        } else if (prev_tag == Tag::kVerb || prev_tag == Tag::kNoun) {
          tag = Tag::kNoun;
        }
      }
    }
    if (question_aux().contains(words[i])) {
      open_aux = true;
    } else if (tag == Tag::kVerb) {
      open_aux = false;
    }
    out.push_back({words[i], tag});
  }
  return out;
}

namespace {

std::string lemmatize_once(const std::string& w, Tag tag, const Resources& res) {
  if (auto it = res.irregular.find(w); it != res.irregular.end()) return it->second;
  if (tag == Tag::kVerb) {
    if (res.has_reading(w, Tag::kVerb)) return w;
    if (auto stem = verb_stem(w, res); !stem.empty()) return stem;
    if (auto stem = s_stem(w, res); !stem.empty() && res.has_reading(stem, Tag::kVerb)) return stem;
    return w;
  }
  if (tag == Tag::kNoun) {
    if (res.has_reading(w, Tag::kNoun)) return w;
    if (w.size() <= 3 || !ends_with(w, "s")) return w;
    if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is") || ends_with(w, "as") || ends_with(w, "os")) {
      return w;
    }
    if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
    if (ends_with(w, "es")) {
      const auto base = w.substr(0, w.size() - 2);
      if (ends_with(base, "s") || ends_with(base, "x") || ends_with(base, "z") || ends_with(base, "ch") ||
          ends_with(base, "sh")) {
        return base;
      }
    }
    return w.substr(0, w.size() - 1);
  }
  return w;
}

}  // namespace

std::string lemmatize(const std::string& token, Tag tag, const Resources& res) {
  std::string current = token;
  for (int i = 0; i < 8; ++i) {
    auto next = lemmatize_once(current, tag, res);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace aa::labeling
