#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aa/common/error.hpp"
#include "aa/common/text.hpp"
#include "aa/embedding.hpp"

using namespace aa;

namespace {

Dataset toy(const std::vector<std::string>& texts) {
  std::vector<Utterance> items;
  for (std::size_t i = 0; i < texts.size(); ++i) items.push_back({"u" + std::to_string(i), texts[i], std::nullopt});
  return Dataset(std::move(items));
}

// Token-space tf-idf with one dimension per distinct token.
std::vector<std::map<std::string, double>> token_tfidf(const std::vector<std::string>& texts) {
  std::vector<std::map<std::string, double>> tf(texts.size());
  std::map<std::string, double> df;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::istringstream in(texts[i]);
    std::string w;
    while (in >> w) tf[i][w] += 1.0;
    for (const auto& [w2, c] : tf[i]) df[w2] += 1.0;
  }
  const double n = static_cast<double>(texts.size());
  for (auto& doc : tf) {
    double norm = 0.0;
    for (auto& [w, v] : doc) {
      v *= std::log((1.0 + n) / (1.0 + df[w])) + 1.0;
      norm += v * v;
    }
    for (auto& [w, v] : doc) v /= std::sqrt(norm);
  }
  return tf;
}

double sparse_dot(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  double s = 0.0;
  for (const auto& [w, v] : a) {
    if (auto it = b.find(w); it != b.end()) s += v * it->second;
  }
  return s;
}

}  // namespace

TEST_CASE("parse_dataset accepts a minimal row") {
  std::istringstream in(R"({"id":"a","text":"hi"})");
  const auto d = parse_dataset(in);
  CHECK(d.size() == 1);
  CHECK(d[0].id == "a");
  CHECK_FALSE(d[0].gold_label.has_value());
}

TEST_CASE("parse_dataset rejects a duplicate id citing its line") {
  std::istringstream in("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\",\"text\":\"y\"}\n{\"id\":\"a\",\"text\":\"z\"}\n");
  try {
    parse_dataset(in);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("parse_dataset rejects malformed and empty inputs") {
  std::istringstream bad("{\"id\":\"a\",\"text\":\"x\"}\nnot json\n");
  CHECK_THROWS_AS(parse_dataset(bad), Error);
  std::istringstream empty("\n\n");
  CHECK_THROWS_AS(parse_dataset(empty), Error);
  std::istringstream no_text("{\"id\":\"a\"}\n");
  CHECK_THROWS_AS(parse_dataset(no_text), Error);
}

TEST_CASE("write_dataset round-trips") {
  Dataset d({{"x1", "book two tickets", "buy_ticket"}, {"x2", "hello", std::nullopt}});
  std::stringstream ss;
  write_dataset(ss, d);
  CHECK(ss.str().rfind(R"({"id":"x1","text":"book two tickets","gold_label":"buy_ticket"})", 0) == 0);
  const auto back = parse_dataset(ss);
  CHECK(back.items() == d.items());
}

TEST_CASE("bundled training corpus has 2,000 gold-labelled rows") {
  const auto d = ingest_dataset(std::filesystem::path(AA_DEFAULT_DATA_DIR) / "corpus" / "movie_train.jsonl");
  CHECK(d.size() == 2000);
  CHECK(d.has_gold());
}

TEST_CASE("builtin embedding matches a token-count tf-idf oracle") {
  const std::vector<std::string> texts = {"book two tickets for tonight", "book a table", "cheap tickets tickets",
                                          "hello there", "what time does it start"};
  const std::size_t dim = 1 << 16;
  std::set<std::size_t> buckets;
  std::set<std::string> vocab;
  for (const auto& t : texts) {
    for (const auto& w : text::word_tokens(t)) vocab.insert(w);
  }
  for (const auto& w : vocab) buckets.insert(fnv1a64(w) % dim);
  REQUIRE(buckets.size() == vocab.size());  // no collisions, so bucket space = token space

  const auto e = embed_hashed_tfidf(toy(texts), dim, nullptr);
  const auto ref = token_tfidf(texts);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t j = 0; j < texts.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += e.vectors(i, k) * e.vectors(j, k);
      CHECK(dot == doctest::Approx(sparse_dot(ref[i], ref[j])).epsilon(1e-12));
    }
  }
  // "hello there" shares no token with "book a table".
  double disjoint = 0.0;
  for (std::size_t k = 0; k < dim; ++k) disjoint += e.vectors(1, k) * e.vectors(3, k);
  CHECK(disjoint == 0.0);
}

TEST_CASE("builtin embedding rows have unit norm and are deterministic") {
  const std::vector<std::string> texts = {"I'd like to add those items to the shopping-cart", "Add Item",
                                          "add item", "¿Dónde está el cine?", "!!!"};
  EmbedderSpec spec;
  const auto a = embed(toy(texts), spec);
  const auto b = embed(toy(texts), spec);
  CHECK(a.vectors == b.vectors);
  CHECK(a.vectors.row(1).size() == 512);
  for (std::size_t i = 0; i < 4; ++i) {
    double n2 = 0.0;
    for (double x : a.vectors.row(i)) n2 += x * x;
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(std::equal(a.vectors.row(1).begin(), a.vectors.row(1).end(), a.vectors.row(2).begin()));
  REQUIRE(a.zero_rows.size() == 1);
  CHECK(a.zero_rows[0] == 4);
}

TEST_CASE("stopword filtering drops listed tokens before hashing") {
  StopwordSet stop = {"the", "a"};
  const auto with = embed_hashed_tfidf(toy({"the cinema", "cinema"}), 256, &stop);
  CHECK(std::equal(with.vectors.row(0).begin(), with.vectors.row(0).end(), with.vectors.row(1).begin()));
}

TEST_CASE("precomputed embeddings are reordered to dataset order") {
  const auto dir = std::filesystem::temp_directory_path() / "aa_test_precomputed";
  std::filesystem::create_directories(dir);
  const auto path = dir / "vec.jsonl";
  {
    std::ofstream out(path);
    out << R"({"id":"u1","vector":[0,1]})" << '\n' << R"({"id":"u0","vector":[2,3]})" << '\n';
  }
  EmbedderSpec spec;
  spec.kind = EmbedderSpec::Kind::kPrecomputedFile;
  spec.path = path;
  const auto e = embed(toy({"a", "b"}), spec);
  CHECK(e.vectors(0, 0) == 2.0);
  CHECK(e.vectors(1, 1) == 1.0);
  CHECK_THROWS_AS(embed(toy({"a", "b", "c"}), spec), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("text helpers") {
  CHECK(text::normalize_label(" Add Item ") == "add_item");
  CHECK(text::word_tokens("Ça COÛTE 10€, ok?") == std::vector<std::string>{"ça", "coûte", "10", "ok"});
  CHECK(text::to_lower(U'Ω') == U'ω');
  CHECK(text::to_lower(U'Ж') == U'ж');
}
