#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aa/common/matrix.hpp"
#include "aa/embedding.hpp"
#include "aa/labeling.hpp"
#include "aa/session.hpp"

namespace aa::eval {

// Agreement between two labelings of the same items (index-aligned). When
// chance agreement is 1 the ratio is undefined: returns 1 if the labelings
// agree everywhere, else NaN.
double cohens_kappa(std::span<const std::string> a, std::span<const std::string> b);

// Square contingency table form; rows are labeler A, columns labeler B.
double cohens_kappa(const std::vector<std::vector<double>>& table);

// Unweighted mean of per-class F1 over the classes present in `gold`.
double macro_f1(std::span<const std::string> predicted, std::span<const std::string> gold);

struct ClassScore {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

std::vector<ClassScore> per_class_scores(std::span<const std::string> predicted, std::span<const std::string> gold);

// Session label -> gold label. A label with no co-occurring gold label is
// unmapped (nullopt).
struct LabelMapping {
  std::map<std::string, std::optional<std::string>> table;

  std::optional<std::string> apply(const std::string& label) const;
  std::vector<std::string> unmapped() const;
};

// Each session label goes to the gold label it co-occurs with most (ties to
// the lexicographically smaller gold label). Entries in `overrides` win.
LabelMapping map_labels(std::span<const std::string> session, std::span<const std::string> gold,
                        const std::map<std::string, std::string>& overrides = {});

// Reads {"session label": "gold label", ...}.
std::map<std::string, std::string> load_mapping_overrides(const std::filesystem::path& path);

// Nearest class centroid by cosine similarity; ties go to the
// lexicographically smallest class.
class CentroidClassifier {
 public:
  CentroidClassifier(const Matrix& points, std::span<const std::string> labels);

  std::string predict(std::span<const double> x) const;
  const std::vector<std::string>& classes() const { return classes_; }
  const Matrix& centroids() const { return centroids_; }

 private:
  std::vector<std::string> classes_;
  Matrix centroids_;
  std::vector<double> norms_;
};

double centroid_classifier_train_eval(const Matrix& train, std::span<const std::string> train_labels,
                                      const Matrix& test, std::span<const std::string> test_labels);

// Fold index per row; each class is spread round-robin over the folds after a
// seeded shuffle.
std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t folds, std::uint64_t seed);

// Mean macro F1 over stratified folds. Folds with an empty training or test
// side are skipped; returns NaN when none remain.
double stratified_cv_f1(const Matrix& points, std::span<const std::string> labels, std::size_t folds,
                        std::uint64_t seed);

struct CostModel {
  double guidelines_label_cost = 10.0;
  double guidelines_skip_cost = 3.0;
  // Charged once per proposal batch shown (the initial proposal and each
  // expansion), not per sentence.
  double binary_check_cost = 1.0;
  double baseline_item_cost = 5.0;

  void validate() const;
};

nlohmann::json cost_model_to_json(const CostModel& c);
CostModel cost_model_from_json(const nlohmann::json& j);

enum class Mode { kAa, kBaseline };
const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

struct RunStats {
  Mode mode = Mode::kAa;
  std::uint64_t seed = 0;
  std::size_t sentences_labelled = 0;
  std::size_t distinct_labels = 0;
  double budget_spent = 0.0;
  double kappa_vs_gold = 0.0;
  double f1_test = 0.0;
  double f1_cv = 0.0;
  std::size_t cv_rows = 0;
  std::size_t actions = 0;
  std::size_t unmapped_labels = 0;
};

nlohmann::json run_stats_to_json(const RunStats& r);

// Train/test data with gold labels plus the classifier embedding of both,
// computed once and shared by every run.
struct SimulationData {
  Dataset train;
  Dataset test;
  Matrix train_vectors;
  Matrix test_vectors;
  const labeling::Resources* resources = nullptr;
  // Gold label set of the training data, sorted.
  std::vector<std::string> gold_labels;
};

// Throws Error(kPrecondition) when either dataset lacks gold labels.
SimulationData prepare_simulation(Dataset train, Dataset test, const labeling::Resources& res,
                                  std::size_t embedding_dim = 512);

struct SimulationOptions {
  double budget = 1500.0;
  double eps = 0.05;
  std::uint64_t seed = 0;
  CostModel cost;
  SessionConfig session;  // rng_seed is overwritten with `seed`
  std::size_t cv_folds = 5;
  // Cross-validate on at most this many labelled rows (seeded sample).
  std::optional<std::size_t> cv_sample;
};

// Rows a run labelled, with their session labels.
struct LabelledSet {
  std::vector<std::size_t> rows;
  std::vector<std::string> labels;
};

// Drives one session with the oracle annotator until the next action does not
// fit in the budget or nothing is left to label.
RunStats simulate(Mode mode, const SimulationData& data, const SimulationOptions& options);

// Scores a finished labelling: mapping to gold, kappa, test and CV F1.
void score_run(const SimulationData& data, const LabelledSet& labelled, const SimulationOptions& options,
               RunStats& stats);

enum class CvSampling { kDownsample, kPooled };

struct ExperimentOptions {
  std::vector<Mode> modes;
  std::vector<std::uint64_t> seeds;
  double budget = 1500.0;
  double eps = 0.05;
  CostModel cost;
  SessionConfig session;
  // kDownsample: when both modes run, AA cross-validation uses as many rows as
  // the Baseline run with the same seed labelled.
  CvSampling cv_sampling = CvSampling::kDownsample;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1); 0 for a single run
};

Summary summarize(std::span<const double> values);

struct ExperimentReport {
  std::vector<RunStats> runs;
  // mode -> metric -> summary
  std::map<std::string, std::map<std::string, Summary>> summary;
};

ExperimentReport run_experiment(const SimulationData& data, const ExperimentOptions& options);

nlohmann::json report_to_json(const ExperimentReport& r, const ExperimentOptions& options);
std::string report_to_table(const ExperimentReport& r);

}  // namespace aa::eval
