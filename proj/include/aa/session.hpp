#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aa/clustering.hpp"
#include "aa/common/rng.hpp"
#include "aa/dimred.hpp"
#include "aa/embedding.hpp"
#include "aa/events.hpp"
#include "aa/labeling.hpp"

namespace aa {

enum class Phase { kGuidelines, kAnnotation, kDone };
const char* phase_name(Phase p);

enum class ReclusterPolicy { kNever, kThreshold };

struct SessionConfig {
  std::size_t pivot_count = 3;
  std::size_t proposal_count = 5;
  std::size_t proposal_max = 20;
  EmbedderSpec embedder;  // stopwords are filled from the labeling resources
  bool embed_drop_stopwords = true;
  std::uint64_t rng_seed = 0;
  double pca_variance = 0.95;
  std::size_t pca_max_components = 50;
  std::optional<std::size_t> fixed_k;
  ElbowOptions elbow;
  ReclusterPolicy recluster = ReclusterPolicy::kThreshold;
  double recluster_fraction = 0.5;

  // Throws Error(kInvalidArgument) when an invariant is violated.
  void validate() const;
};

nlohmann::json config_to_json(const SessionConfig& c);
// Missing keys keep their defaults.
SessionConfig config_from_json(const nlohmann::json& j);

struct GuidelinesPrompt {
  std::size_t cluster = 0;
  std::vector<std::size_t> pivot_rows;
  std::string suggested_label;

  bool operator==(const GuidelinesPrompt&) const = default;
};

struct GuidelinesResponse {
  enum class Kind { kSkip, kLabel };
  Kind kind = Kind::kSkip;
  std::string label;

  static GuidelinesResponse skip() { return {Kind::kSkip, {}}; }
  static GuidelinesResponse provide(std::string label) { return {Kind::kLabel, std::move(label)}; }
};

// Annotation-phase state: the accepted label, its pivots and the current
// proposal.
struct ActiveAnnotation {
  std::size_t cluster = 0;
  std::vector<std::size_t> pivot_rows;
  std::string label;
  std::vector<std::size_t> proposed_rows;
  bool proposal_issued = false;
  std::size_t expand_count = 0;
};

enum class ExpandOutcome { kExpanded, kAtThreshold, kExhausted };

struct PipelineSummary {
  std::size_t points = 0;
  std::size_t embedding_dim = 0;
  std::size_t components = 0;
  double explained_fraction = 0.0;
  std::vector<std::size_t> zero_rows;
  std::vector<std::size_t> ks;
  std::vector<double> sse;
  std::size_t k = 0;
  bool no_elbow = false;
};

// Picks uniformly among `non_empty` clusters, leaving out `previous` when
// another choice exists.
std::size_t choose_cluster(std::span<const std::size_t> non_empty, std::optional<std::size_t> previous, Rng& rng);

struct LabelledRow {
  std::string id;
  std::string text;
  std::string label;
};

void write_labels_jsonl(std::ostream& out, const std::vector<LabelledRow>& rows);

// The active-annotation loop over one dataset.
//
// Not thread-safe: callers serialize mutations (the service holds a
// per-session mutex).
class Session {
 public:
  // embed -> PCA -> elbow/Lloyd -> per-row SVO triplets. Errors carry the
  // failing stage name. `meta` is stored verbatim in the SessionCreated event.
  static Session create(Dataset dataset, SessionConfig config, const labeling::Resources& res,
                        Clock clock = system_clock(), nlohmann::json meta = nlohmann::json::object());

  // Rebuilds a session from its dataset and event log by re-running each
  // recorded action; throws Error(kReplayMismatch) if any regenerated event
  // differs from the log.
  static Session replay(Dataset dataset, const std::vector<AnnotationEvent>& log, const labeling::Resources& res);

  Phase phase() const { return phase_; }
  const Dataset& dataset() const { return dataset_; }
  const SessionConfig& config() const { return config_; }
  const PipelineSummary& pipeline() const { return pipeline_; }
  const EmbeddingMatrix& reduced() const { return reduced_; }
  const Clustering& clustering() const { return clustering_; }
  // Dataset rows covered by clustering(), in assignment order.
  const std::vector<std::size_t>& clustered_rows() const { return clustered_rows_; }
  const nlohmann::json& meta() const { return meta_; }

  std::size_t unlabelled_count() const { return unlabelled_count_; }
  std::size_t labelled_count() const { return dataset_.size() - unlabelled_count_; }
  bool is_labelled(std::size_t row) const { return row_labels_[row].has_value(); }
  const std::optional<std::string>& label_of(std::size_t row) const { return row_labels_[row]; }
  std::vector<std::size_t> unlabelled_rows() const;
  std::map<std::string, std::size_t> label_histogram() const;

  // Unlabelled rows currently assigned to `cluster`.
  std::vector<std::size_t> cluster_members(std::size_t cluster) const;
  // The pivot_count members nearest the centroid (ties by id).
  std::vector<std::size_t> cluster_pivots(std::size_t cluster) const;
  // Predicate/argument modes over the members' triplets.
  labeling::Label cluster_label(std::size_t cluster) const;

  const std::optional<GuidelinesPrompt>& active_prompt() const { return prompt_; }
  const std::optional<ActiveAnnotation>& active_annotation() const { return active_; }

  const std::vector<AnnotationEvent>& events() const { return log_.events(); }
  std::uint64_t version() const { return log_.size(); }
  void set_event_listener(EventListener listener) { log_.set_listener(std::move(listener)); }

  // Current prompt, drawing a new one if none is active. Returns nullopt (and
  // moves to Done) when nothing is left to label. Throws Error(kConflict)
  // outside the Guidelines phase.
  std::optional<GuidelinesPrompt> next_guidelines_prompt();

  // Skip logs the skip and draws a fresh prompt. A label is normalized, given
  // to every pivot, and opens the Annotation phase. An empty label throws
  // Error(kInvalidArgument) and leaves the prompt untouched.
  void respond_guidelines(const GuidelinesResponse& response);

  // Current proposal, computing it on first call: the proposal_count
  // unlabelled rows nearest the pivots.
  std::vector<std::size_t> next_annotation_proposal();

  // Appends the next proposal_count ranked rows, up to proposal_max.
  ExpandOutcome expand_proposal();

  // Labels the checked rows with the active label and returns to Guidelines.
  // Every id must be in the current proposal; otherwise nothing changes and
  // Error(kInvalidArgument) is thrown.
  void commit_annotation(std::span<const std::string> checked_ids);

  // Re-clusters the unlabelled rows once they drop below recluster_fraction of
  // the pool size at the last clustering. Returns true if it ran.
  bool maybe_recluster();

  std::vector<LabelledRow> export_labels() const;

  // Canonical serialization of the full state, including the event log.
  nlohmann::json state_json() const;

 private:
  Session(Dataset dataset, SessionConfig config, const labeling::Resources& res, Clock clock);

  void run_pipeline();
  void cluster_rows(std::vector<std::size_t> rows, std::uint64_t seed);
  void label_row(std::size_t row, const std::string& label);
  void mark_done_if_empty();
  std::vector<std::size_t> ranked_candidates(std::size_t count) const;
  nlohmann::json ids_of(std::span<const std::size_t> rows) const;

  Dataset dataset_;
  SessionConfig config_;
  const labeling::Resources* res_;
  EventLog log_;
  nlohmann::json meta_ = nlohmann::json::object();
  Rng rng_;

  PipelineSummary pipeline_;
  EmbeddingMatrix reduced_;
  std::vector<labeling::SvoTriplet> triplets_;
  Clustering clustering_;
  std::vector<std::size_t> clustered_rows_;
  std::size_t last_cluster_size_ = 0;

  std::vector<std::optional<std::string>> row_labels_;
  std::size_t unlabelled_count_ = 0;
  Phase phase_ = Phase::kGuidelines;
  std::optional<std::size_t> previous_cluster_;
  std::optional<GuidelinesPrompt> prompt_;
  std::optional<ActiveAnnotation> active_;
};

}  // namespace aa
