#include "session_driver.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "aa/common/error.hpp"
#include "aa/common/text.hpp"
#include "aa/simd/kernels.hpp"

namespace aa::testing {

namespace {

class Checker {
 public:
  Checker(InvariantReport& report) : report_(report) {}

  void fail(const std::string& what) {
    ++report_.violation_count;
    if (report_.violations.size() < 10) report_.violations.push_back("step " + std::to_string(step) + ": " + what);
  }
  void expect(bool cond, const std::string& what) {
    if (!cond) fail(what);
  }

  std::size_t step = 0;

 private:
  InvariantReport& report_;
};

struct Tracker {
  std::map<std::size_t, std::string> labels;  // every row ever labelled, with its label
  std::set<std::size_t> committed;
  std::uint64_t version = 0;
  std::optional<Clustering> clustering;
};

void check_partition(const Session& s, Checker& c) {
  const auto n = s.dataset().size();
  c.expect(s.labelled_count() + s.unlabelled_count() == n, "labelled + unlabelled != total");
  const auto unl = s.unlabelled_rows();
  c.expect(unl.size() == s.unlabelled_count(), "unlabelled_rows size mismatch");
  for (auto r : unl) c.expect(!s.is_labelled(r), "unlabelled row carries a label");
  if (s.phase() == Phase::kDone) return;
  std::vector<std::size_t> from_clusters;
  for (std::size_t cl = 0; cl < s.clustering().k; ++cl) {
    const auto m = s.cluster_members(cl);
    from_clusters.insert(from_clusters.end(), m.begin(), m.end());
  }
  std::sort(from_clusters.begin(), from_clusters.end());
  c.expect(from_clusters == unl, "cluster memberships do not partition the unlabelled pool");
}

void check_monotone(const Session& s, Tracker& t, Checker& c) {
  const std::size_t before = t.labels.size();
  for (const auto& [row, label] : t.labels) {
    c.expect(s.label_of(row) == std::optional<std::string>(label), "a label changed or disappeared");
  }
  std::size_t count = 0;
  for (std::size_t r = 0; r < s.dataset().size(); ++r) {
    if (const auto& l = s.label_of(r)) {
      ++count;
      t.labels.emplace(r, *l);
    }
  }
  c.expect(count >= before && count == t.labels.size(), "labelled pool shrank");
  c.expect(s.version() >= t.version, "version went backwards");
  t.version = s.version();
  const auto& ev = s.events();
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (ev[i].seq != i) {
      c.fail("event sequence numbers are not dense");
      break;
    }
  }
}

void check_shown(const Session& s, std::span<const std::size_t> rows, const Tracker& t, Checker& c) {
  for (auto r : rows) {
    c.expect(!s.is_labelled(r), "a labelled row was shown again");
    c.expect(!t.committed.contains(r), "a committed row was shown again");
  }
}

void check_pivots(const Session& s, const GuidelinesPrompt& p, Checker& c) {
  const auto members = s.cluster_members(p.cluster);
  c.expect(p.pivot_rows.size() == std::min(s.config().pivot_count, members.size()), "wrong pivot count");
  const auto centroid = s.clustering().centroids.row(p.cluster);
  double worst_pivot = 0.0;
  for (auto r : p.pivot_rows) {
    c.expect(std::find(members.begin(), members.end(), r) != members.end(), "pivot outside its cluster");
    worst_pivot = std::max(worst_pivot, simd::squared_distance(s.reduced().vectors.row(r), centroid));
  }
  for (auto r : members) {
    if (std::find(p.pivot_rows.begin(), p.pivot_rows.end(), r) != p.pivot_rows.end()) continue;
    c.expect(simd::squared_distance(s.reduced().vectors.row(r), centroid) >= worst_pivot,
             "a non-pivot member is closer to the centroid than a pivot");
  }
}

void check_clustering(const Session& s, Tracker& t, InvariantReport& report) {
  if (t.clustering && *t.clustering == s.clustering()) return;
  t.clustering = s.clustering();
  ++report.kmeans_traces;
  if (!non_increasing(s.clustering().inertia_trace)) report.inertia_non_increasing = false;
}

void check_replay(const Session& s, const Dataset& d, const labeling::Resources& res, InvariantReport& report,
                  Checker& c) {
  std::stringstream log;
  for (const auto& e : s.events()) log << event_to_json(e).dump() << '\n';
  try {
    const auto replayed = Session::replay(d, read_event_log(log), res);
    ++report.replays;
    if (replayed.state_json().dump() != s.state_json().dump()) {
      report.replay_identical = false;
      c.fail("replayed state differs");
    }
  } catch (const Error& e) {
    report.replay_identical = false;
    c.fail(std::string("replay threw: ") + e.what());
  }
}

const std::vector<std::string> kLabels = {"book_ticket", " Ask Price ", "find_theater", "x_y", "cancel_ticket"};

}  // namespace

bool non_increasing(const std::vector<double>& trace) {
  // Lloyd's objective cannot rise in exact arithmetic; allow last-bit noise
  // from the mean update only.
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] > trace[i - 1] + 1e-12 * std::max(1.0, trace[i - 1])) return false;
  }
  return true;
}

Dataset sample_rows(const Dataset& d, std::size_t n, std::size_t stride) {
  std::vector<Utterance> items;
  for (std::size_t r = 0; r < d.size() && items.size() < n; r += stride) items.push_back(d[r]);
  return Dataset(std::move(items));
}

InvariantReport run_invariant_suite(const Dataset& dataset, const SessionConfig& base, const labeling::Resources& res,
                                    std::size_t steps, std::uint64_t seed) {
  InvariantReport report;
  Checker check(report);
  Rng rng(mix_seed(seed, 0x1417));
  std::int64_t now = 1'700'000'000'000;
  const Clock clock = [&now] { return now += 7; };

  auto config = base;
  config.rng_seed = seed;
  auto session = std::make_unique<Session>(Session::create(dataset, config, res, clock));
  ++report.sessions;
  Tracker tracker;

  for (std::size_t step = 0; step < steps; ++step) {
    check.step = step;
    auto& s = *session;
    if (s.phase() == Phase::kDone) {
      check.expect(s.unlabelled_count() == 0, "Done with unlabelled rows left");
      check_replay(s, dataset, res, report, check);
      config.rng_seed = mix_seed(config.rng_seed, step);
      session = std::make_unique<Session>(Session::create(dataset, config, res, clock));
      tracker = Tracker{};
      ++report.sessions;
    } else if (s.phase() == Phase::kGuidelines) {
      const auto p = s.next_guidelines_prompt();
      if (p) {
        check_shown(s, p->pivot_rows, tracker, check);
        check_pivots(s, *p, check);
        check.expect(s.next_guidelines_prompt() == p, "prompt is not idempotent");
        const double u = rng.uniform01();
        if (u < 0.05) {
          const auto before = s.state_json().dump();
          try {
            s.respond_guidelines(GuidelinesResponse::provide("   "));
            check.fail("empty label accepted");
          } catch (const Error&) {
            check.expect(s.state_json().dump() == before, "rejected label changed the state");
          }
        } else if (u < 0.35) {
          const auto labelled = s.labelled_count();
          s.respond_guidelines(GuidelinesResponse::skip());
          check.expect(s.labelled_count() == labelled, "skip changed the labelled pool");
        } else {
          const auto label = rng.bernoulli(0.5) ? p->suggested_label : kLabels[rng.uniform_index(kLabels.size())];
          s.respond_guidelines(GuidelinesResponse::provide(label));
          for (auto r : p->pivot_rows) {
            check.expect(s.label_of(r) == std::optional<std::string>(text::normalize_label(label)),
                         "pivot not labelled with the normalized label");
          }
        }
      }
    } else {
      const auto proposal = s.next_annotation_proposal();
      check.expect(proposal.size() <= s.config().proposal_count || s.active_annotation()->expand_count > 0,
                   "proposal larger than K");
      check.expect(proposal.size() <= s.config().proposal_max, "proposal above the threshold");
      check_shown(s, proposal, tracker, check);
      const double u = rng.uniform01();
      if (u < 0.3) {
        const auto outcome = s.expand_proposal();
        const auto& now_rows = s.active_annotation()->proposed_rows;
        check.expect(std::equal(proposal.begin(), proposal.end(), now_rows.begin()), "expand reordered the proposal");
        if (outcome != ExpandOutcome::kExpanded) check.expect(now_rows.size() == proposal.size(), "no-op expand grew");
        check_shown(s, now_rows, tracker, check);
      } else if (u < 0.35) {
        const auto before = s.state_json().dump();
        const std::vector<std::string> bogus = {"not-an-id"};
        try {
          s.commit_annotation(bogus);
          check.fail("commit of an id outside the proposal accepted");
        } catch (const Error&) {
          check.expect(s.state_json().dump() == before, "rejected commit changed the state");
        }
      } else {
        std::vector<std::string> checked;
        std::vector<std::size_t> rows;
        for (auto r : s.active_annotation()->proposed_rows) {
          if (rng.bernoulli(0.6)) {
            checked.push_back(s.dataset()[r].id);
            rows.push_back(r);
          }
        }
        const auto labelled = s.labelled_count();
        const auto label = s.active_annotation()->label;
        const auto events_before = s.events().size();
        s.commit_annotation(checked);
        ++report.commits;
        check.expect(s.labelled_count() == labelled + rows.size(), "commit did not label exactly the checked rows");
        for (auto r : rows) {
          check.expect(s.label_of(r) == std::optional<std::string>(label), "checked row has the wrong label");
          tracker.committed.insert(r);
        }
        for (std::size_t i = events_before; i < s.events().size(); ++i) {
          if (s.events()[i].kind == EventKind::kReclusterTriggered) ++report.reclusters;
        }
      }
    }
    check_partition(*session, check);
    check_monotone(*session, tracker, check);
    check_clustering(*session, tracker, report);
    ++report.steps;
  }
  check_replay(*session, dataset, res, report, check);
  return report;
}

}  // namespace aa::testing
