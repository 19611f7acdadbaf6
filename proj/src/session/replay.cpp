#include "aa/common/error.hpp"
#include "aa/session.hpp"

namespace aa {

namespace {

Error mismatch(std::uint64_t seq, const std::string& what) {
  return Error(ErrorCode::kReplayMismatch, "event " + std::to_string(seq) + ": " + what);
}

std::vector<std::string> id_list(const nlohmann::json& payload, const char* key) {
  try {
    return payload.at(key).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kParse, std::string("event payload lacks '") + key + "'");
  }
}

}  // namespace

Session Session::replay(Dataset dataset, const std::vector<AnnotationEvent>& log, const labeling::Resources& res) {
  if (log.empty() || log.front().kind != EventKind::kSessionCreated) {
    throw Error(ErrorCode::kReplayMismatch, "event log must start with SessionCreated");
  }
  const auto& created = log.front().payload;
  SessionConfig config = config_from_json(created.at("config"));
  nlohmann::json meta = created.value("meta", nlohmann::json::object());
  Session s = create(std::move(dataset), std::move(config), res, recorded_clock(log), std::move(meta));
  if (s.events().front() != log.front()) throw mismatch(0, "session setup differs from the log");

  while (s.version() < log.size()) {
    const auto start = s.version();
    const auto& e = log[start];
    try {
      switch (e.kind) {
        case EventKind::kGuidelinesPrompt:
          s.next_guidelines_prompt();
          break;
        case EventKind::kGuidelinesSkip:
          s.respond_guidelines(GuidelinesResponse::skip());
          break;
        case EventKind::kGuidelinesLabel:
          s.respond_guidelines(GuidelinesResponse::provide(e.payload.at("label").get<std::string>()));
          break;
        case EventKind::kAnnotationProposal:
          s.next_annotation_proposal();
          break;
        case EventKind::kAnnotationExpand:
          s.expand_proposal();
          break;
        case EventKind::kAnnotationCommit: {
          const auto checked = id_list(e.payload, "checked");
          s.commit_annotation(checked);
          break;
        }
        default:
          throw mismatch(e.seq, std::string("unexpected ") + event_kind_name(e.kind));
      }
    } catch (const nlohmann::json::exception& ex) {
      throw mismatch(e.seq, ex.what());
    } catch (const Error& ex) {
      if (ex.code() == ErrorCode::kReplayMismatch) throw;
      throw mismatch(e.seq, ex.what());
    }
    if (s.version() == start) throw mismatch(e.seq, "action produced no event");
    for (auto i = start; i < s.version(); ++i) {
      if (i >= log.size()) throw mismatch(i, "replay produced an event missing from the log");
      if (s.events()[i] != log[i]) throw mismatch(i, "regenerated event differs from the log");
    }
  }
  return s;
}

}  // namespace aa
