// Acceptance report: one PASS/FAIL line per criterion.
//
// Usage: aa_acceptance [--expect-fail name,name,...]
// Exits 0 when the failing criteria are exactly the expected ones, so known
// shortfalls stay visible in the report while regressions still fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>

#include "aa/clustering.hpp"
#include "aa/dimred.hpp"
#include "aa/eval.hpp"
#include "aa/labeling.hpp"
#include "aa/neighbors.hpp"
#include "oracles.hpp"
#include "session_driver.hpp"
#include "test_support.hpp"

using namespace aa;

namespace {

struct Result {
  std::string name;
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Result> simulation_criteria() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = eval::prepare_simulation(testing::movie_train(), testing::movie_test(), testing::resources());
  eval::ExperimentOptions o;
  o.modes = {eval::Mode::kAa, eval::Mode::kBaseline};
  o.seeds = {1, 2, 3, 4};
  o.budget = 1500;
  o.eps = 0.05;
  const auto report = eval::run_experiment(data, o);
  const double elapsed = seconds_since(t0);

  const auto& aa = report.summary.at("aa");
  const auto& bl = report.summary.at("baseline");
  const auto mean = [](const auto& m, const char* k) { return m.at(k).mean; };
  const double ratio = mean(aa, "sentences_labelled") / mean(bl, "sentences_labelled");

  std::vector<Result> out;
  out.push_back({"throughput", ratio >= 5.0 && elapsed < 60.0,
                 "AA " + fmt("%.1f", mean(aa, "sentences_labelled")) + " vs Baseline " +
                     fmt("%.1f", mean(bl, "sentences_labelled")) + " sentences, ratio " + fmt("%.2f", ratio) +
                     " (target >= 5), " + fmt("%.1f", elapsed) + " s (limit 60)"});
  const bool kappa_ok = mean(aa, "kappa_vs_gold") >= mean(bl, "kappa_vs_gold");
  const bool f1_ok = mean(aa, "f1_test") >= mean(bl, "f1_test");
  out.push_back({"quality", kappa_ok && f1_ok,
                 "kappa AA " + fmt("%.3f", mean(aa, "kappa_vs_gold")) + " vs " + fmt("%.3f", mean(bl, "kappa_vs_gold")) +
                     ", test F1 AA " + fmt("%.3f", mean(aa, "f1_test")) + " vs " + fmt("%.3f", mean(bl, "f1_test"))});
  out.push_back({"label_count", mean(aa, "distinct_labels") <= mean(bl, "distinct_labels"),
                 "distinct labels AA " + fmt("%.2f", mean(aa, "distinct_labels")) + " vs Baseline " +
                     fmt("%.2f", mean(bl, "distinct_labels"))});
  return out;
}

Result oracle_equivalence() {
  Rng rng(2024);
  std::ostringstream detail;
  bool ok = true;

  // (a) exhaustive-sort KNN
  const auto points = oracle::random_normal(1000, 16, rng);
  std::vector<std::string> ids(1000);
  std::vector<std::size_t> perm(1000);
  for (std::size_t i = 0; i < 1000; ++i) perm[i] = i;
  rng.shuffle(perm);
  for (std::size_t i = 0; i < 1000; ++i) ids[i] = "u" + std::to_string(perm[i]);
  std::size_t knn_match = 0;
  for (int set = 0; set < 20; ++set) {
    std::vector<std::size_t> rows = perm;
    rng.shuffle(rows);
    const std::size_t n_pivots = 1 + rng.uniform_index(10);
    std::vector<std::size_t> pivots(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_pivots));
    std::vector<std::size_t> cands(rows.begin() + static_cast<std::ptrdiff_t>(n_pivots), rows.end());
    const bool full = knn_to_pivots(points, ids, pivots, cands, cands.size()) ==
                      oracle::knn_exhaustive(points, ids, pivots, cands, cands.size());
    const bool top = knn_to_pivots(points, ids, pivots, cands, 20) == oracle::knn_exhaustive(points, ids, pivots, cands, 20);
    knn_match += full && top;
  }
  ok = ok && knn_match == 20;
  detail << "(a) knn " << knn_match << "/20";

  // (b) PCA vs Jacobi
  double worst_angle = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    EmbeddingMatrix e;
    e.vectors = oracle::random_normal(50, 10, rng);
    e.ids.assign(50, "");
    const std::size_t p = 1 + static_cast<std::size_t>(trial) % 9;
    const auto model = fit_pca(e, p);
    worst_angle = std::max(worst_angle, oracle::max_principal_angle(model.components, oracle::principal_directions(e.vectors, p)));
  }
  ok = ok && worst_angle < 1e-6;
  detail << "; (b) max principal angle " << fmt("%.2e", worst_angle);

  // (c) kappa on fixed tables
  const std::vector<std::vector<std::vector<long long>>> tables = {
      {{20, 5}, {10, 15}},     {{45, 15}, {25, 15}},        {{25, 35}, {5, 35}},
      {{10, 0}, {0, 10}},      {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}, {{50, 3, 2}, {4, 40, 6}, {1, 2, 30}},
      {{0, 7}, {9, 0}},        {{5, 5}, {5, 5}},            {{12, 1, 0, 2}, {3, 20, 1, 0}, {0, 2, 15, 1}, {1, 0, 3, 9}},
      {{100, 1}, {1, 0}}};
  double worst_kappa = 0.0;
  for (const auto& t : tables) {
    std::vector<std::vector<double>> d;
    for (const auto& row : t) d.emplace_back(row.begin(), row.end());
    worst_kappa = std::max(worst_kappa, std::abs(eval::cohens_kappa(d) - oracle::kappa_exact(t)));
  }
  ok = ok && worst_kappa < 1e-12;
  detail << "; (c) kappa max error " << fmt("%.1e", worst_kappa);

  // (d) elbow selection vs brute-force chord enumeration
  std::size_t elbow_match = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> ks;
    std::vector<double> sse;
    double v = 10.0 + 1000.0 * rng.uniform01();
    const std::size_t k_max = 2 + 3 + rng.uniform_index(27);
    for (std::size_t k = 2; k <= k_max; ++k) {
      ks.push_back(k);
      sse.push_back(v);
      v -= v * 0.5 * rng.uniform01();
    }
    const auto pick = select_elbow(ks, sse);
    const auto expected = oracle::elbow_brute_force(ks, sse);
    elbow_match += pick.k == (expected == 0 ? ks.front() : expected) && pick.no_elbow == (expected == 0);
  }
  std::size_t run_match = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto pts = oracle::random_normal(120, 3, rng);
    ElbowOptions eo;
    eo.k_max = 12;
    const auto r = elbow_select_k(pts, static_cast<std::uint64_t>(trial), eo);
    const auto expected = oracle::elbow_brute_force(r.ks, r.sse);
    run_match += r.selected_k == (expected == 0 ? r.ks.front() : expected);
  }
  ok = ok && elbow_match == 50 && run_match == 5;
  detail << "; (d) elbow " << elbow_match << "/50 curves, " << run_match << "/5 full runs";
  return {"oracle_equivalence", ok, detail.str()};
}

Result invariant_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dataset = testing::sample_rows(testing::movie_train(), 500, 4);
  const auto report = testing::run_invariant_suite(dataset, SessionConfig{}, testing::resources(), 10000, 17);

  // Every k-means run behind an elbow search on the full corpus.
  SessionConfig config;
  EmbedderSpec spec;
  spec.stopwords = testing::resources().stopwords;
  const auto embedded = embed(testing::movie_train(), spec);
  const auto reduced = transform(fit_pca_auto(embedded, config.pca_variance, config.pca_max_components), embedded);
  std::size_t traces = report.kmeans_traces;
  bool inertia_ok = report.inertia_non_increasing;
  for (std::size_t k = 2; k <= 30; ++k) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto seeding = kmeanspp_seed(reduced.vectors, k, mix_seed(k, s));
      inertia_ok = inertia_ok && testing::non_increasing(lloyd(reduced.vectors, seeding.centroids).inertia_trace);
      ++traces;
    }
  }

  std::ostringstream detail;
  detail << report.steps << " steps over " << report.sessions << " sessions (" << report.commits << " commits, "
         << report.reclusters << " re-clusterings), " << report.violation_count << " invariant violations, "
         << report.replays << " replays " << (report.replay_identical ? "byte-identical" : "DIFFER") << ", " << traces
         << " k-means traces " << (inertia_ok ? "non-increasing" : "with an increase") << ", "
         << fmt("%.1f", seconds_since(t0)) << " s";
  for (const auto& v : report.violations) detail << "\n    " << v;
  return {"invariants", report.violation_count == 0 && report.replay_identical && inertia_ok && report.steps == 10000,
          detail.str()};
}

Result labeling_fidelity() {
  const auto& res = testing::resources();
  const std::string sentence = "I'd like to add those items to the shopping-cart";
  const auto t = labeling::sentence_triplet(sentence, res);
  const std::vector<labeling::SvoTriplet> one = {t};
  const auto label = labeling::label_from_triplets(one);
  const std::vector<std::string> greetings = {"hello", "hi there", "good evening", "hey"};
  const auto fallback = labeling::cluster_label(greetings, res);
  const bool ok = label.predicate == std::optional<std::string>("add") &&
                  label.argument == std::optional<std::string>("shopping-cart") &&
                  label.canonical == "add_shopping-cart" && fallback.canonical == "inform_none";
  return {"labeling_fidelity", ok,
          "\"" + sentence + "\" -> " + label.predicate.value_or("-") + " / " + label.argument.value_or("-") + " / " +
              label.canonical + "; greetings -> " + fallback.canonical};
}

std::set<std::string> parse_list(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> expected_fail;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--expect-fail" && i + 1 < argc) {
      expected_fail = parse_list(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--expect-fail name,...]\n", argv[0]);
      return 2;
    }
  }

  std::vector<Result> results;
  for (auto& r : simulation_criteria()) results.push_back(std::move(r));
  results.push_back(oracle_equivalence());
  results.push_back(invariant_suite());
  results.push_back(labeling_fidelity());

  bool as_expected = true;
  for (const auto& r : results) {
    const bool expected = expected_fail.contains(r.name);
    std::printf("%s %s: %s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(),
                !r.pass && expected ? " [known shortfall]" : "");
    if (r.pass == expected) as_expected = false;
  }
  for (const auto& r : results) {
    if (r.pass && expected_fail.contains(r.name)) {
      std::printf("note: %s now passes; remove it from --expect-fail\n", r.name.c_str());
    }
  }
  return as_expected ? 0 : 1;
}
