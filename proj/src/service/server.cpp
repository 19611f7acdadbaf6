#include <httplib.h>

#include "aa/common/error.hpp"
#include "aa/service.hpp"

namespace aa::service {

using nlohmann::json;

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kPrecondition: return 409;
    case ErrorCode::kIo:
    case ErrorCode::kReplayMismatch: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& reason, const std::string& message) {
  send_json(res, status, {{"error", reason}, {"message", message}});
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), error_code_name(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kInvalidArgument, "body must be a JSON object");
  return j;
}

std::string string_field(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

// Caller holds entry.mutex.
void require_ready(const SessionEntry& entry) {
  if (entry.status == SessionStatus::kBuilding) throw Error(ErrorCode::kConflict, "session is still building");
  if (entry.status == SessionStatus::kFailed) throw Error(ErrorCode::kConflict, "session failed: " + entry.error);
}

void check_version(const SessionEntry& entry, const json& body) {
  if (!body.contains("version")) return;
  if (!body["version"].is_number_unsigned()) throw Error(ErrorCode::kInvalidArgument, "'version' must be an integer");
  if (body["version"].get<std::uint64_t>() != entry.version()) {
    throw Error(ErrorCode::kConflict, "stale version " + body["version"].dump() + ", current is " +
                                          std::to_string(entry.version()));
  }
}

json rows_json(const Dataset& d, const std::vector<std::size_t>& rows) {
  json out = json::array();
  for (auto r : rows) out.push_back({{"id", d[r].id}, {"text", d[r].text}});
  return out;
}

json histogram_json(const std::map<std::string, std::size_t>& h) {
  json out = json::object();
  for (const auto& [k, v] : h) out[k] = v;
  return out;
}

json summary_json(const SessionEntry& entry) {
  json j = {{"session_id", entry.id},
            {"mode", entry.mode},
            {"dataset_id", entry.dataset_id},
            {"status", status_name(entry.status)}};
  if (entry.status == SessionStatus::kFailed) j["error"] = entry.error;
  if (entry.aa) {
    const auto& s = *entry.aa;
    j["version"] = s.version();
    j["phase"] = phase_name(s.phase());
    j["total"] = s.dataset().size();
    j["labelled"] = s.labelled_count();
    j["unlabelled"] = s.unlabelled_count();
    j["label_histogram"] = histogram_json(s.label_histogram());
    const auto& p = s.pipeline();
    j["pipeline"] = {{"points", p.points},
                     {"components", p.components},
                     {"k", p.k},
                     {"no_elbow", p.no_elbow},
                     {"zero_rows", p.zero_rows.size()}};
  } else if (entry.baseline) {
    const auto& s = *entry.baseline;
    j["version"] = s.version();
    j["phase"] = s.done() ? "done" : "baseline";
    j["total"] = s.dataset().size();
    j["labelled"] = s.labelled_count();
    j["unlabelled"] = s.unlabelled_count();
    j["label_histogram"] = histogram_json(s.label_histogram());
  }
  return j;
}

// Current prompt, drawing one if none is active. Caller holds entry.mutex.
json prompt_json(SessionEntry& entry) {
  json j;
  if (entry.aa) {
    auto& s = *entry.aa;
    if (s.phase() == Phase::kGuidelines) {
      if (const auto p = s.next_guidelines_prompt()) {
        j["kind"] = "guidelines";
        j["cluster"] = p->cluster;
        j["pivots"] = rows_json(s.dataset(), p->pivot_rows);
        j["suggested_label"] = p->suggested_label;
      }
    } else if (s.phase() == Phase::kAnnotation) {
      const auto proposal = s.next_annotation_proposal();
      const auto& a = *s.active_annotation();
      j["kind"] = "annotation";
      j["label"] = a.label;
      j["pivots"] = rows_json(s.dataset(), a.pivot_rows);
      j["proposals"] = rows_json(s.dataset(), proposal);
      j["can_expand"] = proposal.size() < s.config().proposal_max && s.unlabelled_count() > proposal.size();
    }
    if (!j.contains("kind")) j["kind"] = "done";
    j["phase"] = phase_name(s.phase());
    j["labelled"] = s.labelled_count();
    j["unlabelled"] = s.unlabelled_count();
  } else {
    auto& s = *entry.baseline;
    if (const auto item = s.next_item()) {
      j["kind"] = "baseline";
      j["item"] = {{"id", s.dataset()[item->row].id},
                   {"text", s.dataset()[item->row].text},
                   {"label", item->precomputed_label}};
    } else {
      j["kind"] = "done";
    }
    j["phase"] = s.done() ? "done" : "baseline";
    j["labelled"] = s.labelled_count();
    j["unlabelled"] = s.unlabelled_count();
  }
  j["session_id"] = entry.id;
  j["version"] = entry.version();
  return j;
}

}  // namespace

std::pair<std::string, int> parse_listen(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "listen address must be host:port");
  std::string host = spec.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(spec.substr(colon + 1), &used);
    if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "invalid port in '" + spec + "'");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range in '" + spec + "'");
  return {host, port};
}

Server::Server(Store& store, ServerOptions options)
    : store_(store), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
  http_->set_payload_max_length(options_.max_upload_bytes);
  if (!options_.static_dir.empty() && !http_->set_mount_point("/", options_.static_dir.string())) {
    throw Error(ErrorCode::kNotFound, "static directory '" + options_.static_dir.string() + "' does not exist");
  }
  routes();
}

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }
int Server::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }
bool Server::listen_after_bind() { return http_->listen_after_bind(); }
void Server::stop() {
  if (http_->is_running()) http_->stop();
}
void Server::wait_until_ready() const { http_->wait_until_ready(); }

void Server::routes() {
  auto& s = *http_;
  Store& store = store_;

  s.Post("/api/datasets", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    std::string content;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) throw Error(ErrorCode::kInvalidArgument, "multipart field 'file' is required");
      content = req.get_file_value("file").content;
    } else {
      content = req.body;
    }
    const auto id = store.add_dataset(content);
    send_json(res, 201, {{"dataset_id", id}, {"size", store.dataset(id)->size()}});
  }));

  s.Post("/api/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto mode = body.contains("mode") ? string_field(body, "mode") : std::string("aa");
    const auto dataset_id = string_field(body, "dataset_id");
    const auto config = body.value("config", json::object());
    const auto entry = store.create_session(mode, dataset_id, config);
    send_json(res, 202, {{"session_id", entry->id}, {"status", "building"}});
  }));

  s.Get(R"(/api/sessions/([A-Za-z0-9_-]+))",
        guarded([&store](const httplib::Request& req, httplib::Response& res) {
          const auto entry = store.session(req.matches[1]);
          std::lock_guard lock(entry->mutex);
          send_json(res, 200, summary_json(*entry));
        }));

  s.Get(R"(/api/sessions/([A-Za-z0-9_-]+)/prompt)",
        guarded([&store](const httplib::Request& req, httplib::Response& res) {
          const auto entry = store.session(req.matches[1]);
          std::lock_guard lock(entry->mutex);
          require_ready(*entry);
          send_json(res, 200, prompt_json(*entry));
        }));

  s.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/guidelines)",
         guarded([&store](const httplib::Request& req, httplib::Response& res) {
           const auto entry = store.session(req.matches[1]);
           const auto body = parse_body(req);
           std::lock_guard lock(entry->mutex);
           require_ready(*entry);
           if (!entry->aa) throw Error(ErrorCode::kConflict, "not an active-annotation session");
           check_version(*entry, body);
           auto& session = *entry->aa;
           if (session.phase() != Phase::kGuidelines || !session.active_prompt()) {
             throw Error(ErrorCode::kConflict, "no active guidelines prompt");
           }
           const auto action = string_field(body, "action");
           if (action == "skip") {
             session.respond_guidelines(GuidelinesResponse::skip());
           } else if (action == "label") {
             session.respond_guidelines(GuidelinesResponse::provide(string_field(body, "label")));
           } else {
             throw Error(ErrorCode::kInvalidArgument, "action must be 'skip' or 'label'");
           }
           send_json(res, 200, prompt_json(*entry));
         }));

  s.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/annotations)",
         guarded([&store](const httplib::Request& req, httplib::Response& res) {
           const auto entry = store.session(req.matches[1]);
           const auto body = parse_body(req);
           std::lock_guard lock(entry->mutex);
           require_ready(*entry);
           if (!entry->aa) throw Error(ErrorCode::kConflict, "not an active-annotation session");
           check_version(*entry, body);
           if (!body.contains("checked") || !body["checked"].is_array()) {
             throw Error(ErrorCode::kInvalidArgument, "'checked' must be an array of ids");
           }
           std::vector<std::string> checked;
           for (const auto& v : body["checked"]) {
             if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, "'checked' must be an array of ids");
             checked.push_back(v.get<std::string>());
           }
           entry->aa->commit_annotation(checked);
           send_json(res, 200, prompt_json(*entry));
         }));

  s.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/expand)",
         guarded([&store](const httplib::Request& req, httplib::Response& res) {
           const auto entry = store.session(req.matches[1]);
           const auto body = parse_body(req);
           std::lock_guard lock(entry->mutex);
           require_ready(*entry);
           if (!entry->aa) throw Error(ErrorCode::kConflict, "not an active-annotation session");
           check_version(*entry, body);
           const auto outcome = entry->aa->expand_proposal();
           auto out = prompt_json(*entry);
           out["expand"] = outcome == ExpandOutcome::kExpanded     ? "expanded"
                           : outcome == ExpandOutcome::kAtThreshold ? "at_threshold"
                                                                    : "exhausted";
           send_json(res, 200, out);
         }));

  s.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/baseline)",
         guarded([&store](const httplib::Request& req, httplib::Response& res) {
           const auto entry = store.session(req.matches[1]);
           const auto body = parse_body(req);
           std::lock_guard lock(entry->mutex);
           require_ready(*entry);
           if (!entry->baseline) throw Error(ErrorCode::kConflict, "not a baseline session");
           check_version(*entry, body);
           auto& session = *entry->baseline;
           if (!session.active_item()) throw Error(ErrorCode::kConflict, "no active baseline item");
           const auto action = string_field(body, "action");
           if (action == "confirm") {
             session.respond(BaselineResponse::confirm());
           } else if (action == "skip") {
             session.respond(BaselineResponse::skip());
           } else if (action == "relabel") {
             session.respond(BaselineResponse::relabel(string_field(body, "label")));
           } else {
             throw Error(ErrorCode::kInvalidArgument, "action must be 'confirm', 'relabel' or 'skip'");
           }
           send_json(res, 200, prompt_json(*entry));
         }));

  s.Get(R"(/api/sessions/([A-Za-z0-9_-]+)/export)",
        guarded([&store](const httplib::Request& req, httplib::Response& res) {
          const auto entry = store.session(req.matches[1]);
          std::lock_guard lock(entry->mutex);
          require_ready(*entry);
          std::ostringstream out;
          write_labels_jsonl(out, entry->aa ? entry->aa->export_labels() : entry->baseline->export_labels());
          res.set_header("Content-Disposition", "attachment; filename=\"" + entry->id + ".jsonl\"");
          res.set_content(out.str(), "application/x-ndjson");
        }));
}

}  // namespace aa::service
