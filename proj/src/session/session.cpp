#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "aa/common/error.hpp"
#include "aa/common/text.hpp"
#include "aa/neighbors.hpp"
#include "aa/session.hpp"
#include "aa/simd/kernels.hpp"

namespace aa {

using nlohmann::json;

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kGuidelines: return "guidelines";
    case Phase::kAnnotation: return "annotation";
    case Phase::kDone: return "done";
  }
  return "unknown";
}

void SessionConfig::validate() const {
  if (pivot_count < 1) throw Error(ErrorCode::kInvalidArgument, "pivot_count must be >= 1");
  if (proposal_count < 1) throw Error(ErrorCode::kInvalidArgument, "proposal_count must be >= 1");
  if (proposal_count > proposal_max) throw Error(ErrorCode::kInvalidArgument, "proposal_count exceeds proposal_max");
  if (!(pca_variance > 0.0 && pca_variance <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "pca_variance must be in (0, 1]");
  if (pca_max_components < 1) throw Error(ErrorCode::kInvalidArgument, "pca_max_components must be >= 1");
  if (fixed_k && *fixed_k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (elbow.k_min < 1 || elbow.seeds_per_k < 1) throw Error(ErrorCode::kInvalidArgument, "invalid elbow options");
  if (!(recluster_fraction > 0.0 && recluster_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "recluster_fraction must be in (0, 1]");
  }
  if (embedder.kind == EmbedderSpec::Kind::kBuiltinHashTfidf && embedder.dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dim must be >= 1");
  }
}

json config_to_json(const SessionConfig& c) {
  json j;
  j["pivot_count"] = c.pivot_count;
  j["proposal_count"] = c.proposal_count;
  j["proposal_max"] = c.proposal_max;
  j["embedder"] = {{"kind", c.embedder.kind == EmbedderSpec::Kind::kBuiltinHashTfidf ? "builtin-hash-tfidf"
                                                                                       : "precomputed-file"},
                   {"dim", c.embedder.dim},
                   {"path", c.embedder.path.string()},
                   {"drop_stopwords", c.embed_drop_stopwords}};
  j["rng_seed"] = c.rng_seed;
  j["pca_variance"] = c.pca_variance;
  j["pca_max_components"] = c.pca_max_components;
  j["k"] = c.fixed_k ? json(*c.fixed_k) : json("auto");
  j["elbow"] = {{"k_min", c.elbow.k_min},
                {"k_max", c.elbow.k_max},
                {"seeds_per_k", c.elbow.seeds_per_k},
                {"max_iter", c.elbow.lloyd.max_iter},
                {"tol", c.elbow.lloyd.tol}};
  j["recluster"] = c.recluster == ReclusterPolicy::kThreshold ? "threshold" : "never";
  j["recluster_fraction"] = c.recluster_fraction;
  return j;
}

SessionConfig config_from_json(const json& j) {
  SessionConfig c;
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  try {
    c.pivot_count = j.value("pivot_count", c.pivot_count);
    c.proposal_count = j.value("proposal_count", c.proposal_count);
    c.proposal_max = j.value("proposal_max", c.proposal_max);
    if (j.contains("embedder")) {
      const auto& e = j["embedder"];
      const auto kind = e.value("kind", std::string("builtin-hash-tfidf"));
      if (kind == "builtin-hash-tfidf") {
        c.embedder.kind = EmbedderSpec::Kind::kBuiltinHashTfidf;
      } else if (kind == "precomputed-file") {
        c.embedder.kind = EmbedderSpec::Kind::kPrecomputedFile;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown embedder kind '" + kind + "'");
      }
      c.embedder.dim = e.value("dim", c.embedder.dim);
      c.embedder.path = e.value("path", std::string());
      c.embed_drop_stopwords = e.value("drop_stopwords", c.embed_drop_stopwords);
    }
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.pca_variance = j.value("pca_variance", c.pca_variance);
    c.pca_max_components = j.value("pca_max_components", c.pca_max_components);
    if (j.contains("k") && !(j["k"].is_string() && j["k"] == "auto")) c.fixed_k = j["k"].get<std::size_t>();
    if (j.contains("elbow")) {
      const auto& e = j["elbow"];
      c.elbow.k_min = e.value("k_min", c.elbow.k_min);
      c.elbow.k_max = e.value("k_max", c.elbow.k_max);
      c.elbow.seeds_per_k = e.value("seeds_per_k", c.elbow.seeds_per_k);
      c.elbow.lloyd.max_iter = e.value("max_iter", c.elbow.lloyd.max_iter);
      c.elbow.lloyd.tol = e.value("tol", c.elbow.lloyd.tol);
    }
    if (j.contains("recluster")) {
      const auto policy = j["recluster"].get<std::string>();
      if (policy == "threshold") {
        c.recluster = ReclusterPolicy::kThreshold;
      } else if (policy == "never") {
        c.recluster = ReclusterPolicy::kNever;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown recluster policy '" + policy + "'");
      }
    }
    c.recluster_fraction = j.value("recluster_fraction", c.recluster_fraction);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument, std::string("invalid config: ") + ex.what());
  }
  c.validate();
  return c;
}

std::size_t choose_cluster(std::span<const std::size_t> non_empty, std::optional<std::size_t> previous, Rng& rng) {
  if (non_empty.empty()) throw Error(ErrorCode::kPrecondition, "no non-empty cluster");
  std::vector<std::size_t> pool;
  for (auto c : non_empty) {
    if (non_empty.size() > 1 && previous && c == *previous) continue;
    pool.push_back(c);
  }
  return pool[rng.uniform_index(pool.size())];
}

void write_labels_jsonl(std::ostream& out, const std::vector<LabelledRow>& rows) {
  for (const auto& r : rows) {
    out << nlohmann::ordered_json{{"id", r.id}, {"text", r.text}, {"label", r.label}}.dump() << '\n';
  }
}

Session::Session(Dataset dataset, SessionConfig config, const labeling::Resources& res, Clock clock)
    : dataset_(std::move(dataset)),
      config_(std::move(config)),
      res_(&res),
      log_(std::move(clock)),
      rng_(config_.rng_seed) {}

Session Session::create(Dataset dataset, SessionConfig config, const labeling::Resources& res, Clock clock,
                        json meta) {
  config.validate();
  if (dataset.size() < 2) throw Error(ErrorCode::kPrecondition, "a session needs at least 2 utterances");
  Session s(std::move(dataset), std::move(config), res, std::move(clock));
  s.meta_ = std::move(meta);
  s.run_pipeline();
  json pipeline = {{"points", s.pipeline_.points},
                   {"embedding_dim", s.pipeline_.embedding_dim},
                   {"components", s.pipeline_.components},
                   {"k", s.pipeline_.k},
                   {"no_elbow", s.pipeline_.no_elbow},
                   {"zero_rows", s.ids_of(s.pipeline_.zero_rows)}};
  s.log_.append(EventKind::kSessionCreated,
                {{"config", config_to_json(s.config_)}, {"dataset_size", s.dataset_.size()}, {"pipeline", pipeline},
                 {"meta", s.meta_}});
  return s;
}

void Session::run_pipeline() {
  const std::size_t n = dataset_.size();
  EmbedderSpec spec = config_.embedder;
  if (config_.embed_drop_stopwords) spec.stopwords = res_->stopwords;

  EmbeddingMatrix embedded;
  try {
    embedded = embed(dataset_, spec);
  } catch (const Error& e) {
    throw StageError("embed", e);
  }
  pipeline_.points = n;
  pipeline_.embedding_dim = embedded.dim();
  pipeline_.zero_rows = embedded.zero_rows;

  try {
    const auto model = fit_pca_auto(embedded, config_.pca_variance, config_.pca_max_components);
    reduced_ = transform(model, embedded);
    pipeline_.components = model.output_dim();
    double kept = 0.0;
    for (double v : model.explained_variance) kept += v;
    pipeline_.explained_fraction = model.total_variance > 0.0 ? kept / model.total_variance : 1.0;
  } catch (const Error& e) {
    throw StageError("dimred", e);
  }

  try {
    triplets_.reserve(n);
    for (const auto& u : dataset_.items()) triplets_.push_back(labeling::sentence_triplet(u.text, *res_));
  } catch (const Error& e) {
    throw StageError("labeling", e);
  }

  row_labels_.assign(n, std::nullopt);
  unlabelled_count_ = n;
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  try {
    cluster_rows(std::move(rows), mix_seed(config_.rng_seed, 0xC1u));
  } catch (const Error& e) {
    throw StageError("clustering", e);
  }
}

void Session::cluster_rows(std::vector<std::size_t> rows, std::uint64_t seed) {
  const Matrix points = select_rows(reduced_.vectors, rows);
  if (config_.fixed_k) {
    const std::size_t k = std::min(*config_.fixed_k, points.rows);
    clustering_ = kmeans(points, k, seed, config_.elbow.seeds_per_k, config_.elbow.lloyd);
    pipeline_.ks = {k};
    pipeline_.sse = {clustering_.inertia};
    pipeline_.k = k;
    pipeline_.no_elbow = false;
  } else {
    auto elbow = elbow_select_k(points, seed, config_.elbow);
    clustering_ = std::move(elbow.best);
    pipeline_.ks = std::move(elbow.ks);
    pipeline_.sse = std::move(elbow.sse);
    pipeline_.k = elbow.selected_k;
    pipeline_.no_elbow = elbow.no_elbow;
  }
  clustered_rows_ = std::move(rows);
  last_cluster_size_ = clustered_rows_.size();
}

std::vector<std::size_t> Session::unlabelled_rows() const {
  std::vector<std::size_t> out;
  out.reserve(unlabelled_count_);
  for (std::size_t r = 0; r < row_labels_.size(); ++r) {
    if (!row_labels_[r]) out.push_back(r);
  }
  return out;
}

std::map<std::string, std::size_t> Session::label_histogram() const {
  std::map<std::string, std::size_t> h;
  for (const auto& l : row_labels_) {
    if (l) ++h[*l];
  }
  return h;
}

std::vector<std::size_t> Session::cluster_members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < clustered_rows_.size(); ++i) {
    if (clustering_.assignment[i] == cluster && !row_labels_[clustered_rows_[i]]) out.push_back(clustered_rows_[i]);
  }
  return out;
}

std::vector<std::size_t> Session::cluster_pivots(std::size_t cluster) const {
  const auto members = cluster_members(cluster);
  const auto centroid = clustering_.centroids.row(cluster);
  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(members.size());
  for (auto r : members) by_distance.emplace_back(simd::squared_distance(reduced_.vectors.row(r), centroid), r);
  const std::size_t take = std::min(config_.pivot_count, by_distance.size());
  std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(take), by_distance.end(),
                    [&](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first < b.first;
                      return dataset_[a.second].id < dataset_[b.second].id;
                    });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(by_distance[i].second);
  return out;
}

labeling::Label Session::cluster_label(std::size_t cluster) const {
  std::vector<labeling::SvoTriplet> member_triplets;
  for (auto r : cluster_members(cluster)) member_triplets.push_back(triplets_[r]);
  return labeling::label_from_triplets(member_triplets);
}

json Session::ids_of(std::span<const std::size_t> rows) const {
  json out = json::array();
  for (auto r : rows) out.push_back(dataset_[r].id);
  return out;
}

void Session::label_row(std::size_t row, const std::string& label) {
  if (row_labels_[row]) throw Error(ErrorCode::kPrecondition, "row '" + dataset_[row].id + "' is already labelled");
  row_labels_[row] = label;
  --unlabelled_count_;
}

void Session::mark_done_if_empty() {
  if (unlabelled_count_ == 0) {
    phase_ = Phase::kDone;
    prompt_.reset();
    active_.reset();
  }
}

std::optional<GuidelinesPrompt> Session::next_guidelines_prompt() {
  if (phase_ == Phase::kDone) return std::nullopt;
  if (phase_ != Phase::kGuidelines) throw Error(ErrorCode::kConflict, "session is not in the guidelines phase");
  if (prompt_) return prompt_;

  std::vector<std::size_t> sizes(clustering_.k, 0);
  for (std::size_t i = 0; i < clustered_rows_.size(); ++i) {
    if (!row_labels_[clustered_rows_[i]]) ++sizes[clustering_.assignment[i]];
  }
  std::vector<std::size_t> non_empty;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] > 0) non_empty.push_back(c);
  }
  if (non_empty.empty()) {
    phase_ = Phase::kDone;
    return std::nullopt;
  }

  GuidelinesPrompt p;
  p.cluster = choose_cluster(non_empty, previous_cluster_, rng_);
  p.pivot_rows = cluster_pivots(p.cluster);
  p.suggested_label = cluster_label(p.cluster).canonical;

  log_.append(EventKind::kGuidelinesPrompt,
              {{"cluster", p.cluster}, {"pivots", ids_of(p.pivot_rows)}, {"suggested_label", p.suggested_label}});
  prompt_ = p;
  return p;
}

void Session::respond_guidelines(const GuidelinesResponse& response) {
  if (phase_ != Phase::kGuidelines || !prompt_) throw Error(ErrorCode::kConflict, "no active guidelines prompt");
  if (response.kind == GuidelinesResponse::Kind::kSkip) {
    log_.append(EventKind::kGuidelinesSkip, {{"cluster", prompt_->cluster}});
    previous_cluster_ = prompt_->cluster;
    prompt_.reset();
    next_guidelines_prompt();
    return;
  }

  const auto label = text::normalize_label(response.label);
  if (label.empty()) throw Error(ErrorCode::kInvalidArgument, "label must not be empty");
  log_.append(EventKind::kGuidelinesLabel,
              {{"cluster", prompt_->cluster}, {"label", label}, {"pivots", ids_of(prompt_->pivot_rows)}});
  ActiveAnnotation a;
  a.cluster = prompt_->cluster;
  a.pivot_rows = prompt_->pivot_rows;
  a.label = label;
  for (auto r : a.pivot_rows) label_row(r, label);
  previous_cluster_ = prompt_->cluster;
  prompt_.reset();
  active_ = std::move(a);
  phase_ = Phase::kAnnotation;
  mark_done_if_empty();
}

std::vector<std::size_t> Session::ranked_candidates(std::size_t count) const {
  const auto candidates = unlabelled_rows();
  return knn_to_pivots(reduced_.vectors, reduced_.ids, active_->pivot_rows, candidates, count);
}

std::vector<std::size_t> Session::next_annotation_proposal() {
  if (phase_ == Phase::kDone) return {};
  if (phase_ != Phase::kAnnotation || !active_) throw Error(ErrorCode::kConflict, "session is not in the annotation phase");
  if (active_->proposal_issued) return active_->proposed_rows;
  active_->proposed_rows = ranked_candidates(config_.proposal_count);
  active_->proposal_issued = true;
  log_.append(EventKind::kAnnotationProposal, {{"proposed", ids_of(active_->proposed_rows)}});
  return active_->proposed_rows;
}

ExpandOutcome Session::expand_proposal() {
  if (phase_ != Phase::kAnnotation || !active_ || !active_->proposal_issued) {
    throw Error(ErrorCode::kConflict, "no active proposal to expand");
  }
  const std::size_t current = active_->proposed_rows.size();
  if (current >= config_.proposal_max) return ExpandOutcome::kAtThreshold;
  const std::size_t target = std::min(current + config_.proposal_count, config_.proposal_max);
  const auto ranked = ranked_candidates(target);
  if (ranked.size() <= current) return ExpandOutcome::kExhausted;
  if (!std::equal(active_->proposed_rows.begin(), active_->proposed_rows.end(), ranked.begin())) {
    throw Error(ErrorCode::kPrecondition, "proposal is no longer a prefix of the ranking");
  }
  std::vector<std::size_t> added(ranked.begin() + static_cast<std::ptrdiff_t>(current), ranked.end());
  active_->proposed_rows.insert(active_->proposed_rows.end(), added.begin(), added.end());
  ++active_->expand_count;
  log_.append(EventKind::kAnnotationExpand, {{"added", ids_of(added)}, {"size", active_->proposed_rows.size()}});
  return ExpandOutcome::kExpanded;
}

void Session::commit_annotation(std::span<const std::string> checked_ids) {
  if (phase_ != Phase::kAnnotation || !active_ || !active_->proposal_issued) {
    throw Error(ErrorCode::kConflict, "no active proposal to commit");
  }
  std::unordered_map<std::string, std::size_t> proposed;
  for (auto r : active_->proposed_rows) proposed.emplace(dataset_[r].id, r);
  std::unordered_set<std::string> seen;
  for (const auto& id : checked_ids) {
    if (!proposed.contains(id)) throw Error(ErrorCode::kInvalidArgument, "id '" + id + "' is not in the current proposal");
    if (!seen.insert(id).second) throw Error(ErrorCode::kInvalidArgument, "id '" + id + "' checked twice");
  }
  // Keep proposal order so the log does not depend on client ordering.
  std::vector<std::size_t> checked_rows;
  for (auto r : active_->proposed_rows) {
    if (seen.contains(dataset_[r].id)) checked_rows.push_back(r);
  }
  const auto label = active_->label;
  for (auto r : checked_rows) label_row(r, label);
  log_.append(EventKind::kAnnotationCommit, {{"label", label}, {"checked", ids_of(checked_rows)}});
  active_.reset();
  phase_ = Phase::kGuidelines;
  mark_done_if_empty();
  if (phase_ != Phase::kDone) maybe_recluster();
}

bool Session::maybe_recluster() {
  if (config_.recluster == ReclusterPolicy::kNever || unlabelled_count_ == 0) return false;
  if (static_cast<double>(unlabelled_count_) >= config_.recluster_fraction * static_cast<double>(last_cluster_size_)) {
    return false;
  }
  if (phase_ != Phase::kGuidelines || prompt_) return false;
  const std::uint64_t seed = rng_.next_u64();
  cluster_rows(unlabelled_rows(), seed);
  previous_cluster_.reset();
  log_.append(EventKind::kReclusterTriggered,
              {{"points", clustered_rows_.size()}, {"k", pipeline_.k}, {"no_elbow", pipeline_.no_elbow}});
  return true;
}

std::vector<LabelledRow> Session::export_labels() const {
  std::vector<LabelledRow> rows;
  for (std::size_t r = 0; r < row_labels_.size(); ++r) {
    if (row_labels_[r]) rows.push_back({dataset_[r].id, dataset_[r].text, *row_labels_[r]});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return rows;
}

json Session::state_json() const {
  json j;
  j["phase"] = phase_name(phase_);
  j["version"] = version();
  j["config"] = config_to_json(config_);
  j["meta"] = meta_;
  j["rng"] = rng_.state();
  j["previous_cluster"] = previous_cluster_ ? json(*previous_cluster_) : json(nullptr);
  j["last_cluster_size"] = last_cluster_size_;
  j["clustering"] = {{"k", clustering_.k},
                     {"centroids", clustering_.centroids.data},
                     {"assignment", clustering_.assignment},
                     {"inertia", clustering_.inertia},
                     {"rows", ids_of(clustered_rows_)}};
  json labelled = json::object();
  for (const auto& row : export_labels()) labelled[row.id] = row.label;
  j["labelled"] = labelled;
  auto unl = unlabelled_rows();
  std::vector<std::string> unl_ids;
  for (auto r : unl) unl_ids.push_back(dataset_[r].id);
  std::sort(unl_ids.begin(), unl_ids.end());
  j["unlabelled"] = unl_ids;
  j["prompt"] = prompt_ ? json{{"cluster", prompt_->cluster},
                               {"pivots", ids_of(prompt_->pivot_rows)},
                               {"suggested_label", prompt_->suggested_label}}
                        : json(nullptr);
  j["active"] = active_ ? json{{"cluster", active_->cluster},
                               {"pivots", ids_of(active_->pivot_rows)},
                               {"label", active_->label},
                               {"proposed", ids_of(active_->proposed_rows)},
                               {"proposal_issued", active_->proposal_issued},
                               {"expand_count", active_->expand_count}}
                        : json(nullptr);
  json events = json::array();
  for (const auto& e : log_.events()) events.push_back(event_to_json(e));
  j["events"] = events;
  return j;
}

}  // namespace aa
