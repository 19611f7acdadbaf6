#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "aa/common/error.hpp"
#include "aa/session.hpp"
#include "session_driver.hpp"
#include "test_support.hpp"

using namespace aa;
using aa::testing::resources;

namespace {

const Clock kFrozen = [] { return std::int64_t{0}; };

const Dataset& small() {
  static const Dataset d = testing::sample_rows(testing::movie_train(), 200, 10);
  return d;
}

Session make(const Dataset& d, std::uint64_t seed = 1, SessionConfig config = {}) {
  config.rng_seed = seed;
  return Session::create(d, config, resources(), kFrozen);
}

// Drives a session to the annotation phase with the suggested label.
GuidelinesPrompt to_annotation(Session& s) {
  const auto p = *s.next_guidelines_prompt();
  s.respond_guidelines(GuidelinesResponse::provide(p.suggested_label));
  return p;
}

std::vector<std::string> ids(const Session& s, std::span<const std::size_t> rows) {
  std::vector<std::string> out;
  for (auto r : rows) out.push_back(s.dataset()[r].id);
  return out;
}

}  // namespace

TEST_CASE("session on the 2,000-row corpus starts fully unlabelled") {
  const auto s = make(testing::movie_train());
  CHECK(s.phase() == Phase::kGuidelines);
  CHECK(s.unlabelled_count() == 2000);
  CHECK(s.labelled_count() == 0);
  CHECK(s.pipeline().points == 2000);
  CHECK(s.clustering().k == s.pipeline().k);
  CHECK(s.pipeline().k >= 2);
  CHECK(s.pipeline().k <= 30);
  CHECK(s.pipeline().ks.size() == 29);
}

TEST_CASE("a 2-point dataset forces k_min with the no-elbow flag") {
  Dataset d({{"a", "book a ticket", std::nullopt}, {"b", "find a theater", std::nullopt}});
  const auto s = make(d);
  CHECK(s.pipeline().k == 2);
  CHECK(s.pipeline().no_elbow);
}

TEST_CASE("same dataset and seed give byte-identical sessions") {
  CHECK(make(small(), 5).state_json().dump() == make(small(), 5).state_json().dump());
  CHECK(make(small(), 5).state_json().dump() != make(small(), 6).state_json().dump());
}

TEST_CASE("pivots are clamped to the cluster size") {
  Dataset d({{"a", "book a ticket", std::nullopt}, {"b", "book two tickets", std::nullopt}});
  SessionConfig c;
  c.fixed_k = 1;
  auto s = make(d, 1, c);
  const auto p = s.next_guidelines_prompt();
  REQUIRE(p);
  CHECK(p->pivot_rows.size() == 2);
  CHECK(p->suggested_label == "book_ticket");
}

TEST_CASE("choose_cluster never repeats the previous cluster") {
  Rng rng(7);
  const std::vector<std::size_t> clusters = {0, 1, 2, 3};
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 1000; ++i) ++counts[choose_cluster(clusters, 0, rng)];
  CHECK(counts[0] == 0);
  for (int c = 1; c < 4; ++c) CHECK(std::abs(counts[c] - 333) < 60);
  const std::vector<std::size_t> only = {2};
  CHECK(choose_cluster(only, 2, rng) == 2);
}

TEST_CASE("guidelines responses") {
  auto s = make(small());
  const auto p = *s.next_guidelines_prompt();
  CHECK(*s.next_guidelines_prompt() == p);

  SUBCASE("skip leaves the pool unchanged and draws another cluster") {
    s.respond_guidelines(GuidelinesResponse::skip());
    CHECK(s.labelled_count() == 0);
    CHECK(s.phase() == Phase::kGuidelines);
    REQUIRE(s.active_prompt());
    CHECK(s.active_prompt()->cluster != p.cluster);
  }
  SUBCASE("accepting the suggestion labels the pivots with it") {
    s.respond_guidelines(GuidelinesResponse::provide(p.suggested_label));
    CHECK(s.phase() == Phase::kAnnotation);
    for (auto r : p.pivot_rows) CHECK(s.label_of(r) == std::optional<std::string>(p.suggested_label));
    CHECK(s.labelled_count() == p.pivot_rows.size());
  }
  SUBCASE("labels are normalized") {
    s.respond_guidelines(GuidelinesResponse::provide(" Add Item "));
    CHECK(s.label_of(p.pivot_rows[0]) == std::optional<std::string>("add_item"));
  }
  SUBCASE("an empty label is rejected without changing state") {
    const auto before = s.state_json().dump();
    CHECK_THROWS_AS(s.respond_guidelines(GuidelinesResponse::provide("  ")), Error);
    CHECK(s.state_json().dump() == before);
  }
  SUBCASE("annotation calls are rejected in the guidelines phase") {
    CHECK_THROWS_AS(s.next_annotation_proposal(), Error);
    CHECK_THROWS_AS(s.expand_proposal(), Error);
  }
}

TEST_CASE("annotation proposals and commits") {
  auto s = make(small());
  const auto p = to_annotation(s);
  const auto proposal = s.next_annotation_proposal();
  REQUIRE(proposal.size() == 5);
  CHECK(s.next_annotation_proposal() == proposal);
  for (auto r : proposal) CHECK_FALSE(s.is_labelled(r));

  SUBCASE("checking all five labels them") {
    const auto before = s.labelled_count();
    const auto checked = ids(s, proposal);
    s.commit_annotation(checked);
    CHECK(s.labelled_count() == before + 5);
    CHECK(s.phase() == Phase::kGuidelines);
    for (auto r : proposal) CHECK(s.label_of(r) == std::optional<std::string>(p.suggested_label));
  }
  SUBCASE("checking none keeps only the pivots") {
    s.commit_annotation({});
    CHECK(s.labelled_count() == p.pivot_rows.size());
    CHECK(s.phase() == Phase::kGuidelines);
  }
  SUBCASE("an id outside the proposal is rejected") {
    const auto before = s.state_json().dump();
    const std::vector<std::string> bad = {s.dataset()[p.pivot_rows[0]].id};
    CHECK_THROWS_AS(s.commit_annotation(bad), Error);
    CHECK(s.state_json().dump() == before);
  }
  SUBCASE("expand grows by K up to the threshold") {
    CHECK(s.expand_proposal() == ExpandOutcome::kExpanded);
    CHECK(s.active_annotation()->proposed_rows.size() == 10);
    CHECK(std::equal(proposal.begin(), proposal.end(), s.active_annotation()->proposed_rows.begin()));
    CHECK(s.expand_proposal() == ExpandOutcome::kExpanded);
    CHECK(s.expand_proposal() == ExpandOutcome::kExpanded);
    CHECK(s.active_annotation()->proposed_rows.size() == 20);
    const auto version = s.version();
    CHECK(s.expand_proposal() == ExpandOutcome::kAtThreshold);
    CHECK(s.version() == version);
  }
}

TEST_CASE("expansion stops when the pool is exhausted") {
  Dataset d({{"a", "book a ticket", std::nullopt},
             {"b", "book two tickets", std::nullopt},
             {"c", "book tickets now", std::nullopt},
             {"d", "find a theater", std::nullopt},
             {"e", "find the cinema", std::nullopt}});
  SessionConfig c;
  c.fixed_k = 1;
  c.pivot_count = 1;
  c.proposal_count = 3;
  auto s = make(d, 1, c);
  to_annotation(s);
  CHECK(s.next_annotation_proposal().size() == 3);
  CHECK(s.expand_proposal() == ExpandOutcome::kExpanded);
  CHECK(s.active_annotation()->proposed_rows.size() == 4);
  CHECK(s.expand_proposal() == ExpandOutcome::kExhausted);
}

TEST_CASE("labelling everything ends in Done") {
  Dataset d({{"a", "book a ticket", std::nullopt}, {"b", "book two tickets", std::nullopt}});
  SessionConfig c;
  c.fixed_k = 1;
  auto s = make(d, 1, c);
  to_annotation(s);
  CHECK(s.phase() == Phase::kDone);
  CHECK_FALSE(s.next_guidelines_prompt().has_value());
  CHECK(s.next_annotation_proposal().empty());
  CHECK(s.export_labels().size() == 2);
}

TEST_CASE("re-clustering triggers once the pool halves") {
  auto s = make(small());
  std::size_t reclusters = 0;
  while (s.phase() != Phase::kDone && reclusters == 0) {
    to_annotation(s);
    if (s.phase() == Phase::kDone) break;
    s.next_annotation_proposal();
    while (s.expand_proposal() == ExpandOutcome::kExpanded) {
    }
    const auto all = ids(s, s.active_annotation()->proposed_rows);
    s.commit_annotation(all);
    reclusters = static_cast<std::size_t>(std::count_if(s.events().begin(), s.events().end(), [](const auto& e) {
      return e.kind == EventKind::kReclusterTriggered;
    }));
  }
  REQUIRE(reclusters == 1);
  CHECK(s.unlabelled_count() < 100);
  CHECK(s.clustered_rows().size() == s.unlabelled_count());
  const auto& last = s.events().back();
  CHECK(last.kind == EventKind::kReclusterTriggered);
  CHECK(last.payload["points"] == s.unlabelled_count());
}

TEST_CASE("re-clustering policy 'never' keeps the first clustering") {
  SessionConfig c;
  c.recluster = ReclusterPolicy::kNever;
  auto s = make(small(), 2, c);
  for (int i = 0; i < 40 && s.phase() != Phase::kDone; ++i) {
    to_annotation(s);
    if (s.phase() == Phase::kDone) break;
    s.next_annotation_proposal();
    s.commit_annotation(ids(s, s.active_annotation()->proposed_rows));
  }
  CHECK(s.clustered_rows().size() == 200);
  for (const auto& e : s.events()) CHECK(e.kind != EventKind::kReclusterTriggered);
}

TEST_CASE("replay reproduces the state and rejects a tampered log") {
  auto s = make(small(), 3);
  for (int i = 0; i < 6; ++i) {
    to_annotation(s);
    s.next_annotation_proposal();
    s.expand_proposal();
    const auto rows = s.active_annotation()->proposed_rows;
    std::vector<std::size_t> half(rows.begin(), rows.begin() + 4);
    s.commit_annotation(ids(s, half));
    s.next_guidelines_prompt();
    s.respond_guidelines(GuidelinesResponse::skip());
  }
  const auto replayed = Session::replay(small(), s.events(), resources());
  CHECK(replayed.state_json().dump() == s.state_json().dump());

  auto tampered = s.events();
  for (auto& e : tampered) {
    if (e.kind == EventKind::kAnnotationProposal) {
      e.payload["proposed"][0] = "tr-9999";
      break;
    }
  }
  try {
    Session::replay(small(), tampered, resources());
    FAIL("expected a replay mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kReplayMismatch);
  }
}

TEST_CASE("random operation sequences keep the invariants") {
  const auto report = testing::run_invariant_suite(small(), SessionConfig{}, resources(), 1500, 9);
  for (const auto& v : report.violations) MESSAGE(v);
  CHECK(report.violation_count == 0);
  CHECK(report.replay_identical);
  CHECK(report.inertia_non_increasing);
  CHECK(report.commits > 100);
  CHECK(report.reclusters > 0);
  CHECK(report.sessions > 1);
}

TEST_CASE("pipeline errors name their stage") {
  SessionConfig c;
  c.embedder.kind = EmbedderSpec::Kind::kPrecomputedFile;
  c.embedder.path = "/nonexistent/vectors.jsonl";
  try {
    make(small(), 1, c);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "embed");
  }
}

TEST_CASE("config JSON round-trips and validation rejects bad values") {
  SessionConfig c;
  c.fixed_k = 7;
  c.rng_seed = 42;
  c.recluster = ReclusterPolicy::kNever;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_from_json(nlohmann::json::object()).pivot_count == 3);
  SessionConfig bad;
  bad.proposal_count = 30;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.pca_variance = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("exported labels are JSONL with id, text, label") {
  std::ostringstream out;
  write_labels_jsonl(out, {{"b", "book it", "book_ticket"}});
  CHECK(out.str() == "{\"id\":\"b\",\"text\":\"book it\",\"label\":\"book_ticket\"}\n");
}
