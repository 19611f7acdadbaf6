#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "aa/common/text.hpp"
#include "aa/embedding.hpp"
#include "aa/labeling.hpp"

using namespace aa;
using namespace aa::labeling;

namespace {

const Resources& res() { return default_resources(); }

std::filesystem::path lexicon_dir() { return std::filesystem::path(AA_DEFAULT_DATA_DIR) / "lexicon"; }

// Tag of the word's first reading in the shipped lexicon file.
std::optional<std::string> lexicon_file_tag(const std::string& word) {
  std::ifstream in(lexicon_dir() / "pos_lexicon.tsv");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (line.substr(0, tab) != word) continue;
    const auto tags = line.substr(tab + 1);
    return tags.substr(0, tags.find('|'));
  }
  return std::nullopt;
}

SvoTriplet triplet(std::optional<std::string> s, std::optional<std::string> v, std::optional<std::string> o) {
  return {std::move(s), std::move(v), std::move(o)};
}

}  // namespace

TEST_CASE("tokenize splits clitics and keeps word-internal hyphens") {
  CHECK(tokenize("I'd like to add those items to the shopping-cart") ==
        std::vector<std::string>{"i", "'d", "like", "to", "add", "those", "items", "to", "the", "shopping-cart"});
  CHECK(tokenize("Don't go!") == std::vector<std::string>{"do", "n't", "go"});
  CHECK(tokenize("").empty());
}

TEST_CASE("pos_tag follows the shipped lexicon") {
  const auto tags = pos_tag("add those items", res());
  REQUIRE(tags.size() == 3);
  CHECK(tags[0].tag == Tag::kVerb);
  CHECK(tags[1].tag == Tag::kOther);
  CHECK(tags[2].tag == Tag::kNoun);
  CHECK(lexicon_file_tag("add") == std::string(tag_name(tags[0].tag)));
  CHECK(lexicon_file_tag("those") == std::string(tag_name(tags[1].tag)));
  CHECK(lexicon_file_tag("item") == std::string(tag_name(tags[2].tag)));  // "items" via -s on a known stem
  CHECK(pos_tag("", res()).empty());
}

TEST_CASE("unknown words default to NOUN") {
  const auto tags = pos_tag("zorblax", res());
  REQUIRE(tags.size() == 1);
  CHECK(tags[0].tag == Tag::kNoun);
}

TEST_CASE("worked example: main verb and argument") {
  const auto tagged = pos_tag("I'd like to add those items to the shopping-cart", res());
  const auto svo = extract_svo(tagged);
  CHECK(svo.subject == std::optional<std::string>("i"));
  CHECK(svo.verb == std::optional<std::string>("add"));
  CHECK(svo.object == std::optional<std::string>("shopping-cart"));
  const auto t = sentence_triplet("I'd like to add those items to the shopping-cart", res());
  CHECK(t == triplet(std::nullopt, "add", "shopping-cart"));
  const std::vector<SvoTriplet> one = {t};
  const auto label = label_from_triplets(one);
  CHECK(label.predicate == std::optional<std::string>("add"));
  CHECK(label.argument == std::optional<std::string>("shopping-cart"));
  CHECK(label.canonical == "add_shopping-cart");
}

TEST_CASE("sentences without verb or object yield empty triplets") {
  CHECK(extract_svo(pos_tag("hello there", res())) == SvoTriplet{});
  CHECK(sentence_triplet("book two tickets", res()) == triplet(std::nullopt, "book", "ticket"));
}

TEST_CASE("auxiliaries and questions") {
  CHECK(sentence_triplet("can I book a seat for tonight", res()).verb == std::optional<std::string>("book"));
  CHECK(sentence_triplet("what time does the movie start", res()).verb == std::optional<std::string>("start"));
  CHECK(sentence_triplet("I want to cancel my ticket", res()) == triplet(std::nullopt, "cancel", "ticket"));
}

TEST_CASE("lemmatize strips inflections and uses the irregular table") {
  CHECK(lemmatize("tickets", Tag::kNoun, res()) == "ticket");
  CHECK(lemmatize("bought", Tag::kVerb, res()) == "buy");
  CHECK(lemmatize("booking", Tag::kVerb, res()) == "book");
  CHECK(lemmatize("added", Tag::kVerb, res()) == "add");
}

TEST_CASE("lemmatize is idempotent over corpus tokens") {
  const auto train = ingest_dataset(std::filesystem::path(AA_DEFAULT_DATA_DIR) / "corpus" / "movie_train.jsonl");
  std::set<std::pair<std::string, Tag>> seen;
  for (const auto& u : train.items()) {
    for (const auto& t : pos_tag(u.text, res())) seen.insert({t.text, t.tag});
  }
  for (const auto& [word, tag] : seen) {
    for (Tag as : {tag, Tag::kNoun, Tag::kVerb}) {
      const auto once = lemmatize(word, as, res());
      CAPTURE(word);
      CHECK(lemmatize(once, as, res()) == once);
    }
  }
}

TEST_CASE("remove_stopwords drops stopword slots") {
  CHECK(remove_stopwords(triplet("i", "add", "shopping-cart"), res()) == triplet(std::nullopt, "add", "shopping-cart"));
  CHECK(remove_stopwords(triplet(std::nullopt, "be", "it"), res()) == SvoTriplet{});
}

TEST_CASE("stopword set equals the shipped file") {
  std::ifstream in(lexicon_dir() / "stopwords.txt");
  std::set<std::string> file;
  std::string line;
  while (std::getline(in, line)) {
    line = text::trim(line);
    if (!line.empty() && line[0] != '#') file.insert(line);
  }
  CHECK(file.size() == res().stopwords->size());
  for (const auto& w : file) CHECK(res().is_stopword(w));
  CHECK(res().is_stopword("i"));
  CHECK(res().is_stopword("be"));
  CHECK_FALSE(res().is_stopword("add"));
}

TEST_CASE("cluster label takes independent modes") {
  const std::vector<SvoTriplet> ts = {triplet(std::nullopt, "add", "shopping-cart"),
                                      triplet(std::nullopt, "add", "shopping-cart"),
                                      triplet(std::nullopt, "add", "item"), triplet(std::nullopt, "put", std::nullopt)};
  CHECK(label_from_triplets(ts).canonical == "add_shopping-cart");

  const std::vector<SvoTriplet> tie = {triplet(std::nullopt, "remove", "item"), triplet(std::nullopt, "add", "item"),
                                       triplet(std::nullopt, "remove", "item"), triplet(std::nullopt, "add", "item")};
  CHECK(label_from_triplets(tie).canonical == "add_item");
}

TEST_CASE("cluster label oracle on sentences, invariant under permutation") {
  std::vector<std::string> sentences = {"add those items to the shopping-cart", "please add it to my shopping-cart",
                                        "add the item", "put the item there", "add more"};
  // Oracle: count the lemmas of each sentence's triplet directly.
  std::map<std::string, int> verbs, objects;
  for (const auto& s : sentences) {
    const auto t = sentence_triplet(s, res());
    if (t.verb) ++verbs[*t.verb];
    if (t.object) ++objects[*t.object];
  }
  const auto best = [](const std::map<std::string, int>& m) {
    return std::max_element(m.begin(), m.end(), [](const auto& a, const auto& b) { return a.second < b.second; })->first;
  };
  const auto expected = best(verbs) + "_" + best(objects);
  CHECK(cluster_label(sentences, res()).canonical == expected);
  std::mt19937 g(3);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(sentences.begin(), sentences.end(), g);
    CHECK(cluster_label(sentences, res()).canonical == expected);
  }
}

TEST_CASE("verb-less clusters get the fallback label") {
  const std::vector<std::string> greetings = {"hello", "hi there", "good evening"};
  const auto label = cluster_label(greetings, res());
  CHECK(label.canonical == "inform_none");
  CHECK_FALSE(label.predicate.has_value());
  CHECK_FALSE(label.argument.has_value());
}

TEST_CASE("canonical label shape") {
  CHECK(is_canonical_label("add_shopping-cart"));
  CHECK(is_canonical_label("inform_none"));
  CHECK_FALSE(is_canonical_label("add"));
  CHECK_FALSE(is_canonical_label("Add_item"));
  CHECK_FALSE(is_canonical_label("add_item_x"));
}
