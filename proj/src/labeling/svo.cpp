#include <algorithm>
#include <map>
#include <unordered_set>

#include "aa/labeling.hpp"

namespace aa::labeling {

namespace {

// Surface forms (and lemmas) of verbs that only carry tense, mood or
// modality when another verb follows.
const std::unordered_set<std::string>& auxiliary_forms() {
  static const std::unordered_set<std::string> words = {
      "be", "is", "am", "are", "was", "were", "been", "being", "'m", "'re",
      "do", "does", "did", "doing", "done",
      "have", "has", "had", "having", "'ve",
      "will", "would", "'d", "'ll", "can", "could", "shall", "should", "may", "might", "must"};
  return words;
}

// Catenative verbs: auxiliary when followed by a verb or "to" + verb.
const std::unordered_set<std::string>& catenative_forms() {
  static const std::unordered_set<std::string> words = {
      "like", "likes", "liked", "liking", "want", "wants", "wanted", "wanting", "need", "needs", "needed", "needing"};
  return words;
}

const std::unordered_set<std::string>& skippable() {
  static const std::unordered_set<std::string> words = {"not", "n't", "really", "just", "also", "still", "please", "actually"};
  return words;
}

const std::unordered_set<std::string>& prepositions() {
  static const std::unordered_set<std::string> words = {
      "to", "into", "onto", "in", "for", "at", "on", "with", "about", "of", "from", "by", "near", "after",
      "before", "during", "around", "between", "without", "under", "over", "through", "than", "like"};
  return words;
}

std::size_t next_content(std::span<const TaggedToken> s, std::size_t i) {
  while (i < s.size() && skippable().contains(s[i].text)) ++i;
  return i;
}

bool is_auxiliary(std::span<const TaggedToken> s, std::size_t i) {
  const auto& w = s[i].text;
  if (auxiliary_forms().contains(w)) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[j].tag == Tag::kVerb) return true;
    }
    return false;
  }
  if (catenative_forms().contains(w)) {
    const std::size_t j = next_content(s, i + 1);
    if (j >= s.size()) return false;
    if (s[j].tag == Tag::kVerb) return true;
    if (s[j].text == "to") {
      const std::size_t k = next_content(s, j + 1);
      return k < s.size() && s[k].tag == Tag::kVerb;
    }
  }
  return false;
}

std::string sanitize(const std::string& lemma) {
  std::string out;
  for (char c : lemma) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-') out.push_back(c);
  }
  const auto b = out.find_first_not_of('-');
  if (b == std::string::npos) return {};
  const auto e = out.find_last_not_of('-');
  return out.substr(b, e - b + 1);
}

std::optional<std::string> lemma_slot(const std::optional<std::string>& surface, Tag tag, const Resources& res) {
  if (!surface) return std::nullopt;
  auto s = sanitize(lemmatize(*surface, tag, res));
  if (s.empty()) return std::nullopt;
  return s;
}

std::optional<std::string> mode(const std::map<std::string, std::size_t>& counts) {
  std::optional<std::string> best;
  std::size_t best_count = 0;
  // std::map iterates ascending, so the first maximum is the smallest lemma.
  for (const auto& [lemma, count] : counts) {
    if (count > best_count) {
      best = lemma;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

SvoTriplet extract_svo(std::span<const TaggedToken> s) {
  SvoTriplet t;
  std::optional<std::size_t> verb;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].tag == Tag::kVerb && !is_auxiliary(s, i)) {
      verb = i;
      break;
    }
  }
  if (!verb) return t;
  t.verb = s[*verb].text;

  for (std::size_t i = 0; i < *verb; ++i) {
    if (s[i].tag == Tag::kNoun || s[i].tag == Tag::kPron) {
      t.subject = s[i].text;
      break;
    }
  }

  std::optional<std::string> direct;
  std::optional<std::string> destination;
  std::optional<std::string> locative;
  std::string preposition;
  std::size_t i = *verb + 1;
  while (i < s.size()) {
    if (s[i].tag == Tag::kNoun) {
      std::size_t j = i;
      while (j + 1 < s.size() && s[j + 1].tag == Tag::kNoun) ++j;
      const auto& head = s[j].text;
      if (preposition.empty()) {
        if (!direct) direct = head;
      } else if (preposition == "to" || preposition == "into" || preposition == "onto") {
        if (!destination) destination = head;
      } else if (preposition == "in") {
        if (!locative) locative = head;
      }
      preposition.clear();
      i = j + 1;
      continue;
    }
    if (s[i].tag == Tag::kVerb || s[i].tag == Tag::kPron) {
      preposition.clear();
    } else if (prepositions().contains(s[i].text)) {
      preposition = s[i].text;
    }
    ++i;
  }
  if (destination) {
    t.object = destination;
  } else if (direct) {
    t.object = direct;
  } else {
    t.object = locative;
  }
  return t;
}

SvoTriplet lemmatize_triplet(const SvoTriplet& t, const Resources& res) {
  return {lemma_slot(t.subject, Tag::kNoun, res), lemma_slot(t.verb, Tag::kVerb, res),
          lemma_slot(t.object, Tag::kNoun, res)};
}

SvoTriplet remove_stopwords(const SvoTriplet& t, const Resources& res) {
  const auto keep = [&](const std::optional<std::string>& slot) -> std::optional<std::string> {
    if (slot && res.is_stopword(*slot)) return std::nullopt;
    return slot;
  };
  return {keep(t.subject), keep(t.verb), keep(t.object)};
}

std::vector<SvoTriplet> remove_stopwords(std::span<const SvoTriplet> ts, const Resources& res) {
  std::vector<SvoTriplet> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(remove_stopwords(t, res));
  return out;
}

SvoTriplet sentence_triplet(std::string_view text, const Resources& res) {
  const auto tagged = pos_tag(text, res);
  return remove_stopwords(lemmatize_triplet(extract_svo(tagged), res), res);
}

Label label_from_triplets(std::span<const SvoTriplet> triplets) {
  std::map<std::string, std::size_t> verbs;
  std::map<std::string, std::size_t> objects;
  for (const auto& t : triplets) {
    if (t.verb) ++verbs[*t.verb];
    if (t.object) ++objects[*t.object];
  }
  Label label;
  label.predicate = mode(verbs);
  label.argument = mode(objects);
  label.canonical = std::string(label.predicate ? *label.predicate : std::string(kFallbackPredicate)) + "_" +
                    std::string(label.argument ? *label.argument : std::string(kFallbackArgument));
  return label;
}

Label cluster_label(std::span<const std::string> sentences, const Resources& res) {
  std::vector<SvoTriplet> triplets;
  triplets.reserve(sentences.size());
  for (const auto& s : sentences) triplets.push_back(sentence_triplet(s, res));
  return label_from_triplets(triplets);
}

bool is_canonical_label(std::string_view s) {
  const auto us = s.find('_');
  if (us == std::string_view::npos || us == 0 || us + 1 >= s.size()) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == us) continue;
    const char c = s[i];
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
  }
  return true;
}

}  // namespace aa::labeling
