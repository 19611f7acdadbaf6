#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace aa {

enum class EventKind {
  kSessionCreated,
  kGuidelinesPrompt,
  kGuidelinesSkip,
  kGuidelinesLabel,
  kAnnotationProposal,
  kAnnotationExpand,
  kAnnotationCommit,
  kReclusterTriggered,
  kBaselineCreated,
  kBaselineItem,
  kBaselineConfirm,
  kBaselineRelabel,
  kBaselineSkip,
};

const char* event_kind_name(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct AnnotationEvent {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::kSessionCreated;
  nlohmann::json payload;

  bool operator==(const AnnotationEvent&) const = default;
};

nlohmann::json event_to_json(const AnnotationEvent& e);
AnnotationEvent event_from_json(const nlohmann::json& j);

// Milliseconds since the Unix epoch.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

// Replays recorded timestamps in order, then falls back to the system clock.
Clock recorded_clock(const std::vector<AnnotationEvent>& log);

using EventListener = std::function<void(const AnnotationEvent&)>;

// Append-only event list with dense sequence numbers.
class EventLog {
 public:
  explicit EventLog(Clock clock = system_clock()) : clock_(std::move(clock)) {}

  const AnnotationEvent& append(EventKind kind, nlohmann::json payload);

  const std::vector<AnnotationEvent>& events() const { return events_; }
  std::uint64_t size() const { return events_.size(); }

  void set_listener(EventListener listener) { listener_ = std::move(listener); }

 private:
  Clock clock_;
  std::vector<AnnotationEvent> events_;
  EventListener listener_;
};

// Reads a JSONL event log; throws Error(kParse) with the line number.
std::vector<AnnotationEvent> read_event_log(std::istream& in);

}  // namespace aa
