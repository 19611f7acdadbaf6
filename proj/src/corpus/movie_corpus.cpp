#include <cstdio>
#include <map>

#include "aa/common/rng.hpp"
#include "aa/corpus.hpp"

namespace aa::corpus {

namespace {

using Pool = std::vector<std::string>;

const Pool kMovies = {"the avengers", "frozen", "inside out", "the martian", "star wars", "jurassic world",
                      "deadpool", "zootopia", "the revenant", "spectre", "minions", "creed", "the jungle book",
                      "finding dory", "ghostbusters", "moana", "arrival", "la la land", "the big short",
                      "kung fu panda"};
const Pool kNumbers = {"two", "three", "four", "2", "3", "a couple of", "five", "one"};
const Pool kTimes = {"7 pm", "9:30", "noon", "8 o'clock", "5 pm", "10 pm", "6:45", "11 am", "4:15", "midnight"};
const Pool kDays = {"tonight", "tomorrow", "friday", "saturday", "this weekend", "sunday afternoon",
                    "next tuesday", "today"};
const Pool kPlaces = {"seattle", "downtown", "the mall", "bellevue", "portland", "my neighborhood", "chicago",
                      "the north side", "san diego", "boston"};
const Pool kGenres = {"comedy", "action movie", "horror film", "family movie", "drama", "thriller",
                      "romantic comedy", "animated movie"};
const Pool kSeats = {"the back row", "the middle", "the aisle", "the front", "the balcony", "the center"};
const Pool kGroups = {"students", "seniors", "kids", "military members", "members"};
const Pool kOpeners = {"", "", "", "", "", "hi ", "ok ", "hey ", "um ", "so ", "yes ", "well "};
const Pool kClosers = {"", "", "", "", "", " please", " thanks", " if possible", " for me"};

// {m} movie, {n} number, {t} time, {d} day, {p} place, {g} genre, {s} seat,
// {c} customer group.
const std::map<std::string, Pool> kTemplates = {
    {"buy_ticket",
     {"i want to buy {n} tickets for {m}", "can i get {n} tickets to {m} {d}", "book {n} tickets for {m} at {t}",
      "i'd like to purchase {n} tickets for {m}", "i need {n} tickets for the {t} showing of {m}",
      "please reserve {n} seats for {m} {d}", "get me {n} tickets for {m}", "we want to buy tickets for {m} {d}",
      "i would like to book tickets for {m} at {t} {d}", "can you book {n} adult tickets for {m}",
      "buy {n} tickets to the {t} show", "i'd like to add those tickets to my cart"}},
    {"find_showtime",
     {"what time is {m} playing {d}", "when does {m} start", "show me the showtimes for {m}",
      "what are the show times for {m} {d}", "is {m} playing at {t}", "when is the next showing of {m}",
      "can you check the times for {m} {d}", "what times do you have for {m}", "find showtimes for {m} {d}",
      "does {m} have a showing after {t}"}},
    {"find_theater",
     {"which theater is showing {m}", "where can i see {m} near {p}", "find a theater near {p}",
      "what cinemas in {p} have {m}", "is there a theater close to {p}", "which cinema near {p} plays {m}",
      "search for theaters in {p}", "where is {m} showing {d}", "locate a cinema around {p}"}},
    {"ask_price",
     {"how much are tickets for {m}", "what does a ticket cost", "how much is a ticket for the {t} show",
      "what is the price of {n} tickets", "how much would {n} tickets cost", "tell me the ticket price",
      "what do tickets cost {d}", "is the {t} show cheaper", "what's the price for {m} in 3d"}},
    {"inform_date",
     {"{d}", "{d} at {t}", "{d} works", "{d} please", "around {t} {d}", "maybe {d}", "{d} around {t}",
      "the {t} one {d}", "{d} is better for us", "{d} in the evening"}},
    {"inform_location",
     {"i'm in {p}", "near {p}", "somewhere around {p}", "i live in {p}", "{p}", "my zip is near {p}",
      "close to {p} please", "i am near {p} right now", "in {p}", "the one in {p}"}},
    {"recommend_movie",
     {"what movie should i watch {d}", "recommend a good {g}", "can you suggest a {g} for {d}",
      "what's a good {g} playing {d}", "suggest something for the kids", "any good {g} out right now",
      "i want to watch a {g}", "recommend something like {m}", "what should we see {d}"}},
    {"cancel_ticket",
     {"cancel my tickets for {m}", "i need to cancel my reservation", "please cancel the booking for {d}",
      "can i cancel my order for {m}", "cancel the {t} tickets", "i want to cancel my tickets",
      "we can't make it so cancel the tickets", "drop my reservation for {m}"}},
    {"change_time",
     {"can i change my tickets to {t}", "change my booking to the {t} show", "move my reservation to {d}",
      "switch my tickets to {t}", "i want to change the time to {t}", "can we switch to the {t} showing",
      "reschedule my tickets for {d}", "change it to {d} at {t}"}},
    {"choose_seat",
     {"i'd like seats in {s}", "can we sit in {s}", "put us in {s}", "choose seats in {s}",
      "i want {n} seats together in {s}", "reserve seats near {s}", "we prefer seats in {s}",
      "pick seats in {s} for us"}},
    {"confirm_booking",
     {"yes that's correct", "sounds good, confirm it", "confirm the booking", "yes please book it",
      "that works, go ahead", "perfect, confirm my order", "yes confirm those tickets", "correct",
      "great, go ahead and confirm"}},
    {"ask_discount",
     {"do you have discounts for {c}", "is there a discount for {c}", "any deals for {c}",
      "do {c} get cheaper tickets", "can i use a coupon", "are there discounts on {d}",
      "do you offer a discount for {c}"}},
    {"greet_none",
     {"hi", "hello", "hello there", "hi there", "good evening", "hey", "good morning", "hello, hi"}},
    {"thank_none",
     {"thanks", "thank you", "thank you so much", "thanks a lot", "great, thanks", "thanks for your help",
      "thank you very much"}},
};

const std::vector<IntentShare> kIntents = {
    {"buy_ticket", 400},     {"find_showtime", 300},   {"find_theater", 220},  {"ask_price", 180},
    {"inform_date", 150},    {"inform_location", 140}, {"recommend_movie", 120}, {"cancel_ticket", 100},
    {"change_time", 90},     {"choose_seat", 80},      {"confirm_booking", 70}, {"ask_discount", 60},
    {"greet_none", 50},      {"thank_none", 40},
};

const std::string& pick(const Pool& pool, Rng& rng) { return pool[rng.uniform_index(pool.size())]; }

std::string fill(const std::string& tmpl, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      switch (tmpl[i + 1]) {
        case 'm': out += pick(kMovies, rng); break;
        case 'n': out += pick(kNumbers, rng); break;
        case 't': out += pick(kTimes, rng); break;
        case 'd': out += pick(kDays, rng); break;
        case 'p': out += pick(kPlaces, rng); break;
        case 'g': out += pick(kGenres, rng); break;
        case 's': out += pick(kSeats, rng); break;
        case 'c': out += pick(kGroups, rng); break;
        default: out += tmpl.substr(i, 3); break;
      }
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

std::string utterance(const std::string& label, Rng& rng) {
  auto text = pick(kOpeners, rng) + fill(pick(kTemplates.at(label), rng), rng);
  // Short social turns do not take a closer.
  if (label != "greet_none" && label != "thank_none" && label != "confirm_booking") text += pick(kClosers, rng);
  if (rng.bernoulli(0.3) && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 'a' + 'A');
  return text;
}

std::string make_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04zu", prefix, i);
  return buf;
}

}  // namespace

const std::vector<IntentShare>& movie_intents() { return kIntents; }

MovieCorpus generate_movie_corpus(std::uint64_t seed, std::size_t test_per_label) {
  Rng rng(seed);
  std::vector<std::string> labels;
  for (const auto& intent : kIntents) labels.insert(labels.end(), intent.train_count, intent.label);
  rng.shuffle(labels);

  std::vector<Utterance> train;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    train.push_back({make_id("tr", i + 1), utterance(labels[i], rng), labels[i]});
  }
  std::vector<std::string> test_labels;
  for (const auto& intent : kIntents) test_labels.insert(test_labels.end(), test_per_label, intent.label);
  rng.shuffle(test_labels);
  std::vector<Utterance> test;
  for (std::size_t i = 0; i < test_labels.size(); ++i) {
    test.push_back({make_id("te", i + 1), utterance(test_labels[i], rng), test_labels[i]});
  }
  return {Dataset(std::move(train)), Dataset(std::move(test))};
}

}  // namespace aa::corpus
