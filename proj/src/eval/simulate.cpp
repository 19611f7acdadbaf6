#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <set>
#include <sstream>

#include "aa/baseline.hpp"
#include "aa/common/error.hpp"
#include "aa/common/rng.hpp"
#include "aa/eval.hpp"

namespace aa::eval {

using nlohmann::json;

void CostModel::validate() const {
  for (double c : {guidelines_label_cost, guidelines_skip_cost, binary_check_cost, baseline_item_cost}) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::kInvalidArgument, "cost model values must be positive");
  }
}

json cost_model_to_json(const CostModel& c) {
  return {{"guidelines_label", c.guidelines_label_cost},
          {"guidelines_skip", c.guidelines_skip_cost},
          {"binary_check", c.binary_check_cost},
          {"baseline_item", c.baseline_item_cost}};
}

CostModel cost_model_from_json(const json& j) {
  CostModel c;
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "cost model must be a JSON object");
  try {
    c.guidelines_label_cost = j.value("guidelines_label", c.guidelines_label_cost);
    c.guidelines_skip_cost = j.value("guidelines_skip", c.guidelines_skip_cost);
    c.binary_check_cost = j.value("binary_check", c.binary_check_cost);
    c.baseline_item_cost = j.value("baseline_item", c.baseline_item_cost);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument, std::string("invalid cost model: ") + ex.what());
  }
  c.validate();
  return c;
}

const char* mode_name(Mode m) { return m == Mode::kAa ? "aa" : "baseline"; }

Mode parse_mode(const std::string& s) {
  if (s == "aa") return Mode::kAa;
  if (s == "baseline") return Mode::kBaseline;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + s + "'");
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json run_stats_to_json(const RunStats& r) {
  return {{"mode", mode_name(r.mode)},
          {"seed", r.seed},
          {"sentences_labelled", r.sentences_labelled},
          {"distinct_labels", r.distinct_labels},
          {"budget_spent", r.budget_spent},
          {"kappa_vs_gold", number_or_null(r.kappa_vs_gold)},
          {"f1_test", number_or_null(r.f1_test)},
          {"f1_cv", number_or_null(r.f1_cv)},
          {"cv_rows", r.cv_rows},
          {"actions", r.actions},
          {"unmapped_labels", r.unmapped_labels}};
}

SimulationData prepare_simulation(Dataset train, Dataset test, const labeling::Resources& res,
                                  std::size_t embedding_dim) {
  if (train.empty() || !train.has_gold()) throw Error(ErrorCode::kPrecondition, "training data needs gold labels");
  if (test.empty() || !test.has_gold()) throw Error(ErrorCode::kPrecondition, "test data needs gold labels");
  // One embedding space for both sides so idf is shared.
  std::vector<Utterance> joint;
  joint.reserve(train.size() + test.size());
  for (const auto& u : train.items()) joint.push_back({"train:" + u.id, u.text, u.gold_label});
  for (const auto& u : test.items()) joint.push_back({"test:" + u.id, u.text, u.gold_label});
  const auto e = embed_hashed_tfidf(Dataset(std::move(joint)), embedding_dim, res.stopwords.get());

  SimulationData d;
  std::vector<std::size_t> train_rows(train.size()), test_rows(test.size());
  for (std::size_t i = 0; i < train.size(); ++i) train_rows[i] = i;
  for (std::size_t i = 0; i < test.size(); ++i) test_rows[i] = train.size() + i;
  d.train_vectors = select_rows(e.vectors, train_rows);
  d.test_vectors = select_rows(e.vectors, test_rows);
  std::set<std::string> gold;
  for (const auto& u : train.items()) gold.insert(*u.gold_label);
  d.gold_labels.assign(gold.begin(), gold.end());
  d.train = std::move(train);
  d.test = std::move(test);
  d.resources = &res;
  return d;
}

namespace {

struct Outcome {
  LabelledSet labelled;
  double spent = 0.0;
  std::size_t actions = 0;
};

Clock frozen_clock() {
  return [] { return std::int64_t{0}; };
}

// A gold label other than `avoid`, uniformly.
std::string wrong_label(const std::vector<std::string>& labels, const std::string& avoid, Rng& rng) {
  if (labels.size() < 2) return avoid;
  std::size_t i = rng.uniform_index(labels.size() - 1);
  if (labels[i] >= avoid) ++i;
  return labels[i];
}

const std::string& gold_of(const Dataset& d, std::size_t row) { return *d[row].gold_label; }

// Most frequent gold label among the pivots; ties go to the label of the
// nearest pivot.
std::string pivot_majority(const Dataset& d, const std::vector<std::size_t>& pivots) {
  std::map<std::string, std::size_t> counts;
  for (auto r : pivots) ++counts[gold_of(d, r)];
  std::string best;
  std::size_t best_count = 0;
  for (auto r : pivots) {
    const auto c = counts[gold_of(d, r)];
    if (c > best_count) {
      best = gold_of(d, r);
      best_count = c;
    }
  }
  return best;
}

Outcome run_aa(const SimulationData& data, const SimulationOptions& o) {
  SessionConfig config = o.session;
  config.rng_seed = o.seed;
  Session s = Session::create(data.train, config, *data.resources, frozen_clock());
  Rng oracle(mix_seed(o.seed, 0x0AC1Eu));
  const auto& cost = o.cost;
  Outcome out;
  auto affordable = [&](double c) { return out.spent + c <= o.budget; };

  while (s.phase() != Phase::kDone) {
    if (s.phase() == Phase::kGuidelines) {
      const auto prompt = s.next_guidelines_prompt();
      if (!prompt || !affordable(cost.guidelines_label_cost)) break;
      auto label = pivot_majority(s.dataset(), prompt->pivot_rows);
      if (oracle.bernoulli(o.eps)) label = wrong_label(data.gold_labels, label, oracle);
      s.respond_guidelines(GuidelinesResponse::provide(label));
      out.spent += cost.guidelines_label_cost;
      ++out.actions;
      continue;
    }
    if (!affordable(cost.binary_check_cost)) break;
    auto batch = s.next_annotation_proposal();
    out.spent += cost.binary_check_cost;
    ++out.actions;
    const auto& active = s.active_annotation()->label;
    std::vector<std::string> checked;
    // Asks for more while most of the latest batch was worth checking.
    while (true) {
      std::size_t hits = 0;
      for (auto r : batch) {
        const bool match = gold_of(s.dataset(), r) == active;
        const bool flip = oracle.bernoulli(o.eps);
        if (match != flip) {
          checked.push_back(s.dataset()[r].id);
          ++hits;
        }
      }
      if (2 * hits <= batch.size() || !affordable(cost.binary_check_cost)) break;
      const std::size_t before = s.active_annotation()->proposed_rows.size();
      if (s.expand_proposal() != ExpandOutcome::kExpanded) break;
      out.spent += cost.binary_check_cost;
      ++out.actions;
      const auto& proposed = s.active_annotation()->proposed_rows;
      batch.assign(proposed.begin() + static_cast<std::ptrdiff_t>(before), proposed.end());
    }
    s.commit_annotation(checked);
  }
  for (std::size_t r = 0; r < s.dataset().size(); ++r) {
    if (s.is_labelled(r)) {
      out.labelled.rows.push_back(r);
      out.labelled.labels.push_back(*s.label_of(r));
    }
  }
  return out;
}

Outcome run_baseline(const SimulationData& data, const SimulationOptions& o) {
  BaselineSession s = BaselineSession::create(data.train, o.seed, *data.resources, frozen_clock());
  // The oracle judges a suggestion by the gold class it stands for.
  std::vector<std::string> suggested, gold;
  for (std::size_t r = 0; r < s.dataset().size(); ++r) {
    suggested.push_back(s.precomputed_label(r));
    gold.push_back(gold_of(s.dataset(), r));
  }
  const auto mapping = map_labels(suggested, gold);
  Rng oracle(mix_seed(o.seed, 0xBA5E0u));
  Outcome out;
  while (!s.done() && out.spent + o.cost.baseline_item_cost <= o.budget) {
    const auto item = s.next_item();
    const auto& g = gold_of(s.dataset(), item->row);
    if (oracle.bernoulli(o.eps)) {
      s.respond(BaselineResponse::relabel(wrong_label(data.gold_labels, g, oracle)));
    } else if (mapping.apply(item->precomputed_label) == g) {
      s.respond(BaselineResponse::confirm());
    } else {
      s.respond(BaselineResponse::relabel(g));
    }
    out.spent += o.cost.baseline_item_cost;
    ++out.actions;
  }
  for (std::size_t r = 0; r < s.dataset().size(); ++r) {
    if (s.is_labelled(r)) {
      out.labelled.rows.push_back(r);
      out.labelled.labels.push_back(*s.label_of(r));
    }
  }
  return out;
}

Outcome run_oracle(Mode mode, const SimulationData& data, const SimulationOptions& o) {
  if (!(o.budget >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "budget must be non-negative");
  if (!(o.eps >= 0.0 && o.eps <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be in [0, 1]");
  o.cost.validate();
  if (!data.train.has_gold()) throw Error(ErrorCode::kPrecondition, "simulation needs gold labels");
  return mode == Mode::kAa ? run_aa(data, o) : run_baseline(data, o);
}

}  // namespace

void score_run(const SimulationData& data, const LabelledSet& labelled, const SimulationOptions& options,
               RunStats& stats) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  stats.sentences_labelled = labelled.rows.size();
  stats.distinct_labels = std::set<std::string>(labelled.labels.begin(), labelled.labels.end()).size();
  stats.kappa_vs_gold = stats.f1_test = stats.f1_cv = nan;
  stats.cv_rows = 0;
  if (labelled.rows.empty()) return;

  std::vector<std::string> gold;
  for (auto r : labelled.rows) gold.push_back(gold_of(data.train, r));
  const auto mapping = map_labels(labelled.labels, gold);
  stats.unmapped_labels = mapping.unmapped().size();
  std::vector<std::string> mapped;
  std::vector<std::size_t> train_rows;
  std::vector<std::string> train_labels;
  for (std::size_t i = 0; i < labelled.rows.size(); ++i) {
    const auto m = mapping.apply(labelled.labels[i]);
    mapped.push_back(m ? *m : "unmapped:" + labelled.labels[i]);
    if (m) {
      train_rows.push_back(labelled.rows[i]);
      train_labels.push_back(*m);
    }
  }
  stats.kappa_vs_gold = cohens_kappa(mapped, gold);
  if (train_rows.empty()) return;

  std::vector<std::string> test_gold;
  for (const auto& u : data.test.items()) test_gold.push_back(*u.gold_label);
  const Matrix train = select_rows(data.train_vectors, train_rows);
  stats.f1_test = centroid_classifier_train_eval(train, train_labels, data.test_vectors, test_gold);

  std::vector<std::size_t> cv_index(train_rows.size());
  for (std::size_t i = 0; i < cv_index.size(); ++i) cv_index[i] = i;
  if (options.cv_sample && *options.cv_sample < cv_index.size()) {
    Rng rng(mix_seed(options.seed, 0xCF5u));
    rng.shuffle(cv_index);
    cv_index.resize(*options.cv_sample);
    std::sort(cv_index.begin(), cv_index.end());
  }
  std::vector<std::string> cv_labels;
  for (auto i : cv_index) cv_labels.push_back(train_labels[i]);
  stats.cv_rows = cv_index.size();
  if (cv_index.size() >= 2) {
    stats.f1_cv = stratified_cv_f1(select_rows(train, cv_index), cv_labels, options.cv_folds,
                                   mix_seed(options.seed, 0xF01Du));
  }
}

RunStats simulate(Mode mode, const SimulationData& data, const SimulationOptions& options) {
  const auto outcome = run_oracle(mode, data, options);
  RunStats stats;
  stats.mode = mode;
  stats.seed = options.seed;
  stats.budget_spent = outcome.spent;
  stats.actions = outcome.actions;
  score_run(data, outcome.labelled, options, stats);
  return stats;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  if (finite.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  for (double v : finite) s.mean += v;
  s.mean /= static_cast<double>(finite.size());
  if (finite.size() > 1) {
    double ss = 0.0;
    for (double v : finite) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(finite.size() - 1));
  }
  return s;
}

ExperimentReport run_experiment(const SimulationData& data, const ExperimentOptions& options) {
  if (options.modes.empty() || options.seeds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one mode and one seed");
  }
  struct Job {
    Mode mode;
    SimulationOptions options;
    std::future<Outcome> outcome;
  };
  std::vector<Job> jobs;
  for (auto seed : options.seeds) {
    for (auto mode : options.modes) {
      SimulationOptions o;
      o.budget = options.budget;
      o.eps = options.eps;
      o.seed = seed;
      o.cost = options.cost;
      o.session = options.session;
      jobs.push_back({mode, o, {}});
    }
  }
  for (auto& j : jobs) {
    j.outcome = std::async(std::launch::async, [&data, &j] { return run_oracle(j.mode, data, j.options); });
  }
  std::vector<Outcome> outcomes;
  for (auto& j : jobs) outcomes.push_back(j.outcome.get());

  const bool both = std::find(options.modes.begin(), options.modes.end(), Mode::kAa) != options.modes.end() &&
                    std::find(options.modes.begin(), options.modes.end(), Mode::kBaseline) != options.modes.end();
  std::map<std::uint64_t, std::size_t> baseline_count;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].mode == Mode::kBaseline) baseline_count[jobs[i].options.seed] = outcomes[i].labelled.rows.size();
  }

  ExperimentReport report;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto o = jobs[i].options;
    if (jobs[i].mode == Mode::kAa && both && options.cv_sampling == CvSampling::kDownsample) {
      o.cv_sample = baseline_count[o.seed];
    }
    RunStats stats;
    stats.mode = jobs[i].mode;
    stats.seed = o.seed;
    stats.budget_spent = outcomes[i].spent;
    stats.actions = outcomes[i].actions;
    score_run(data, outcomes[i].labelled, o, stats);
    report.runs.push_back(stats);
  }

  for (auto mode : options.modes) {
    std::map<std::string, std::vector<double>> columns;
    for (const auto& r : report.runs) {
      if (r.mode != mode) continue;
      columns["sentences_labelled"].push_back(static_cast<double>(r.sentences_labelled));
      columns["distinct_labels"].push_back(static_cast<double>(r.distinct_labels));
      columns["budget_spent"].push_back(r.budget_spent);
      columns["kappa_vs_gold"].push_back(r.kappa_vs_gold);
      columns["f1_test"].push_back(r.f1_test);
      columns["f1_cv"].push_back(r.f1_cv);
    }
    for (const auto& [metric, values] : columns) report.summary[mode_name(mode)][metric] = summarize(values);
  }
  return report;
}

json report_to_json(const ExperimentReport& r, const ExperimentOptions& options) {
  json runs = json::array();
  for (const auto& s : r.runs) runs.push_back(run_stats_to_json(s));
  json summary = json::object();
  for (const auto& [mode, metrics] : r.summary) {
    for (const auto& [metric, s] : metrics) {
      summary[mode][metric] = {{"mean", number_or_null(s.mean)}, {"std", number_or_null(s.stddev)}};
    }
  }
  json modes = json::array();
  for (auto m : options.modes) modes.push_back(mode_name(m));
  json out = {{"config",
               {{"modes", modes},
                {"seeds", options.seeds},
                {"budget", options.budget},
                {"eps", options.eps},
                {"cost_model", cost_model_to_json(options.cost)},
                {"cv_sampling", options.cv_sampling == CvSampling::kDownsample ? "downsample" : "pooled"},
                {"session", config_to_json(options.session)}}},
              {"runs", runs},
              {"summary", summary}};
  if (r.summary.contains("aa") && r.summary.contains("baseline")) {
    const double b = r.summary.at("baseline").at("sentences_labelled").mean;
    out["throughput_ratio"] = b > 0.0 ? json(r.summary.at("aa").at("sentences_labelled").mean / b) : json(nullptr);
  }
  return out;
}

std::string report_to_table(const ExperimentReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-9s %-19s %12s %12s\n", "mode", "metric", "mean", "sigma");
  out << line;
  for (const auto& [mode, metrics] : r.summary) {
    for (const auto& [metric, s] : metrics) {
      std::snprintf(line, sizeof line, "%-9s %-19s %12.4f %12.4f\n", mode.c_str(), metric.c_str(), s.mean, s.stddev);
      out << line;
    }
  }
  return out.str();
}

}  // namespace aa::eval
