#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aa/embedding.hpp"
#include "aa/events.hpp"
#include "aa/labeling.hpp"
#include "aa/session.hpp"

namespace aa {

struct BaselineItem {
  std::size_t row = 0;
  std::string precomputed_label;

  bool operator==(const BaselineItem&) const = default;
};

struct BaselineResponse {
  enum class Kind { kConfirm, kRelabel, kSkip };
  Kind kind = Kind::kConfirm;
  std::string label;

  static BaselineResponse confirm() { return {Kind::kConfirm, {}}; }
  static BaselineResponse relabel(std::string label) { return {Kind::kRelabel, std::move(label)}; }
  static BaselineResponse skip() { return {Kind::kSkip, {}}; }
};

// One sentence at a time in a seeded random order, each shown with the
// predicate_argument label computed from that sentence alone.
class BaselineSession {
 public:
  static BaselineSession create(Dataset dataset, std::uint64_t seed, const labeling::Resources& res,
                                Clock clock = system_clock(), nlohmann::json meta = nlohmann::json::object());

  // Throws Error(kReplayMismatch) when a regenerated event differs from the log.
  static BaselineSession replay(Dataset dataset, const std::vector<AnnotationEvent>& log,
                                const labeling::Resources& res);

  const Dataset& dataset() const { return dataset_; }
  std::uint64_t seed() const { return seed_; }
  const nlohmann::json& meta() const { return meta_; }
  bool done() const { return queue_.empty(); }

  const std::string& precomputed_label(std::size_t row) const { return precomputed_[row]; }
  std::size_t unlabelled_count() const { return queue_.size(); }
  std::size_t labelled_count() const { return dataset_.size() - queue_.size(); }
  bool is_labelled(std::size_t row) const { return row_labels_[row].has_value(); }
  const std::optional<std::string>& label_of(std::size_t row) const { return row_labels_[row]; }
  std::map<std::string, std::size_t> label_histogram() const;
  const std::optional<BaselineItem>& active_item() const { return active_; }

  const std::vector<AnnotationEvent>& events() const { return log_.events(); }
  std::uint64_t version() const { return log_.size(); }
  void set_event_listener(EventListener listener) { log_.set_listener(std::move(listener)); }

  // The item at the head of the queue; nullopt once everything is labelled.
  std::optional<BaselineItem> next_item();

  // Confirm keeps the precomputed label, Relabel stores the normalized label,
  // Skip moves the item to the tail of the queue. Throws Error(kConflict)
  // without an active item.
  void respond(const BaselineResponse& response);

  std::vector<LabelledRow> export_labels() const;
  nlohmann::json state_json() const;

 private:
  BaselineSession(Dataset dataset, std::uint64_t seed, Clock clock);

  Dataset dataset_;
  std::uint64_t seed_;
  EventLog log_;
  nlohmann::json meta_ = nlohmann::json::object();
  std::vector<std::string> precomputed_;
  std::deque<std::size_t> queue_;
  std::vector<std::optional<std::string>> row_labels_;
  std::optional<BaselineItem> active_;
};

}  // namespace aa
