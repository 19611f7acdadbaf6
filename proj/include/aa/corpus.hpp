#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aa/embedding.hpp"

namespace aa::corpus {

struct IntentShare {
  std::string label;
  std::size_t train_count;
};

// The 14 movie-ticket intents and their training counts (2,000 total).
const std::vector<IntentShare>& movie_intents();

struct MovieCorpus {
  Dataset train;
  Dataset test;
};

// Template-generated user turns from a movie-ticket booking domain, with
// gold labels. `test_per_label` rows per intent are generated separately from
// the training rows. Output depends only on `seed`.
MovieCorpus generate_movie_corpus(std::uint64_t seed = 2140, std::size_t test_per_label = 10);

}  // namespace aa::corpus
