#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aa/embedding.hpp"

namespace aa::labeling {

enum class Tag { kVerb, kNoun, kPron, kOther };

const char* tag_name(Tag t);

struct Resources {
  // Readings per word; the first is the default when context is undecided.
  std::unordered_map<std::string, std::vector<Tag>> lexicon;
  std::unordered_map<std::string, std::string> irregular;  // inflected form -> lemma
  std::shared_ptr<const StopwordSet> stopwords;

  bool has_reading(const std::string& word, Tag t) const;
  bool is_stopword(const std::string& word) const { return stopwords && stopwords->contains(word); }

  // Reads pos_lexicon.tsv, irregular.tsv and stopwords.txt from `dir`.
  static Resources load(const std::filesystem::path& dir);
};

// $AA_RESOURCE_DIR when set, else the lexicon directory bundled with the build.
std::filesystem::path default_resource_dir();

// Loaded once from default_resource_dir().
const Resources& default_resources();

struct TaggedToken {
  std::string text;  // lowercased surface form
  Tag tag;

  bool operator==(const TaggedToken&) const = default;
};

// Lowercases, splits on whitespace and punctuation (keeping word-internal
// hyphens), splits clitics ("i'd" -> "i" "'d", "don't" -> "do" "n't").
std::vector<std::string> tokenize(std::string_view text);

// Lexicon lookup, then irregular forms, then -ing/-ed/-s analysis against
// known stems, defaulting to NOUN. Words with both VERB and NOUN readings are
// resolved from the preceding token.
std::vector<TaggedToken> pos_tag(std::string_view text, const Resources& res);

// Exception table, else suffix stripping with stem repair checked against the
// lexicon; applied until the result is stable, so it is idempotent.
std::string lemmatize(const std::string& token, Tag tag, const Resources& res);

struct SvoTriplet {
  std::optional<std::string> subject;
  std::optional<std::string> verb;
  std::optional<std::string> object;

  bool operator==(const SvoTriplet&) const = default;
};

// Surface-form slots from one tagged sentence.
//  verb:    first VERB that is not an auxiliary. be/do/have and the modals are
//           auxiliary when another verb follows anywhere in the sentence;
//           like/want/need when followed by a verb or "to" + verb.
//  subject: first NOUN/PRON before the verb.
//  object:  head (last noun of the run) of the NP inside a following
//           to/into/onto phrase; else the first bare noun run after the verb;
//           else the head of a following "in" phrase. No verb, no object.
SvoTriplet extract_svo(std::span<const TaggedToken> sentence);

// Lemmatizes each slot (verb as VERB, subject and object as NOUN) and strips
// characters outside [a-z0-9-]; a slot that becomes empty is dropped.
SvoTriplet lemmatize_triplet(const SvoTriplet& t, const Resources& res);

// Drops slots whose lemma is a stopword.
SvoTriplet remove_stopwords(const SvoTriplet& t, const Resources& res);
std::vector<SvoTriplet> remove_stopwords(std::span<const SvoTriplet> ts, const Resources& res);

// pos_tag -> extract_svo -> lemmatize_triplet -> remove_stopwords.
SvoTriplet sentence_triplet(std::string_view text, const Resources& res);

struct Label {
  std::optional<std::string> predicate;
  std::optional<std::string> argument;
  std::string canonical;

  bool operator==(const Label&) const = default;
};

inline constexpr std::string_view kFallbackPredicate = "inform";
inline constexpr std::string_view kFallbackArgument = "none";

// Independent modes over verbs and objects; ties go to the lexicographically
// smallest lemma. A missing predicate becomes "inform", a missing argument
// "none".
Label label_from_triplets(std::span<const SvoTriplet> triplets);

Label cluster_label(std::span<const std::string> sentences, const Resources& res);

// True for "<lemma>_<lemma>" with lemmas over [a-z0-9-].
bool is_canonical_label(std::string_view s);

}  // namespace aa::labeling
