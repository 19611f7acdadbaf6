#include <array>
#include <chrono>
#include <memory>

#include "aa/common/error.hpp"
#include "aa/common/text.hpp"
#include "aa/events.hpp"

namespace aa {

namespace {

struct KindName {
  EventKind kind;
  const char* name;
};

constexpr std::array<KindName, 13> kKindNames{{
    {EventKind::kSessionCreated, "SessionCreated"},
    {EventKind::kGuidelinesPrompt, "GuidelinesPrompt"},
    {EventKind::kGuidelinesSkip, "GuidelinesSkip"},
    {EventKind::kGuidelinesLabel, "GuidelinesLabel"},
    {EventKind::kAnnotationProposal, "AnnotationProposal"},
    {EventKind::kAnnotationExpand, "AnnotationExpand"},
    {EventKind::kAnnotationCommit, "AnnotationCommit"},
    {EventKind::kReclusterTriggered, "ReclusterTriggered"},
    {EventKind::kBaselineCreated, "BaselineCreated"},
    {EventKind::kBaselineItem, "BaselineItem"},
    {EventKind::kBaselineConfirm, "BaselineConfirm"},
    {EventKind::kBaselineRelabel, "BaselineRelabel"},
    {EventKind::kBaselineSkip, "BaselineSkip"},
}};

}  // namespace

const char* event_kind_name(EventKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "Unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (name == k.name) return k.kind;
  }
  return std::nullopt;
}

nlohmann::json event_to_json(const AnnotationEvent& e) {
  return {{"seq", e.seq}, {"ts", e.timestamp_ms}, {"kind", event_kind_name(e.kind)}, {"payload", e.payload}};
}

AnnotationEvent event_from_json(const nlohmann::json& j) {
  AnnotationEvent e;
  try {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.timestamp_ms = j.at("ts").get<std::int64_t>();
    const auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::kParse, "unknown event kind '" + j.at("kind").get<std::string>() + "'");
    e.kind = *kind;
    e.payload = j.at("payload");
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("malformed event: ") + ex.what());
  }
  return e;
}

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

Clock recorded_clock(const std::vector<AnnotationEvent>& log) {
  auto stamps = std::make_shared<std::vector<std::int64_t>>();
  for (const auto& e : log) stamps->push_back(e.timestamp_ms);
  auto next = std::make_shared<std::size_t>(0);
  auto fallback = system_clock();
  return [stamps, next, fallback] {
    if (*next < stamps->size()) return (*stamps)[(*next)++];
    return fallback();
  };
}

const AnnotationEvent& EventLog::append(EventKind kind, nlohmann::json payload) {
  AnnotationEvent e;
  e.seq = events_.size();
  e.timestamp_ms = clock_();
  e.kind = kind;
  e.payload = std::move(payload);
  events_.push_back(std::move(e));
  if (listener_) listener_(events_.back());
  return events_.back();
}

std::vector<AnnotationEvent> read_event_log(std::istream& in) {
  std::vector<AnnotationEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error&) {
      throw Error(ErrorCode::kParse, "event log line " + std::to_string(line_no) + ": malformed JSON");
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, "event log line " + std::to_string(line_no) + ": " + e.what());
    }
    if (out.back().seq != out.size() - 1) {
      throw Error(ErrorCode::kParse, "event log line " + std::to_string(line_no) + ": sequence gap");
    }
  }
  return out;
}

}  // namespace aa
