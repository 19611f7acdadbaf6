#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "aa/common/error.hpp"
#include "aa/service.hpp"

namespace aa::service {

namespace fs = std::filesystem;
using nlohmann::json;

const char* status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::kBuilding: return "building";
    case SessionStatus::kReady: return "ready";
    case SessionStatus::kFailed: return "failed";
  }
  return "unknown";
}

std::uint64_t SessionEntry::version() const {
  if (aa) return aa->version();
  if (baseline) return baseline->version();
  return 0;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string random_id() {
  static std::mutex m;
  static std::mt19937_64 gen(std::random_device{}() ^
                             static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::lock_guard lock(m);
  return "s-" + hex64(gen()).substr(0, 12);
}

bool safe_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace

Store::Store(fs::path data_dir, const labeling::Resources& res) : data_dir_(std::move(data_dir)), res_(&res) {
  std::error_code ec;
  fs::create_directories(data_dir_ / "datasets", ec);
  fs::create_directories(data_dir_ / "sessions", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create data directory '" + data_dir_.string() + "': " + ec.message());
}

Store::~Store() {
  for (auto& t : builders_) {
    if (t.joinable()) t.join();
  }
}

fs::path Store::session_dir(const std::string& id) const { return data_dir_ / "sessions" / id; }

std::string Store::add_dataset(const std::string& jsonl) {
  std::istringstream in(jsonl);
  auto parsed = std::make_shared<const Dataset>(parse_dataset(in));
  std::ostringstream canonical;
  write_dataset(canonical, *parsed);
  const std::string id = "ds-" + hex64(fnv1a64(canonical.str()));
  std::lock_guard lock(mutex_);
  if (!datasets_.contains(id)) {
    std::ofstream out(data_dir_ / "datasets" / (id + ".jsonl"), std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot store dataset");
    out << canonical.str();
    datasets_.emplace(id, std::move(parsed));
  }
  return id;
}

std::shared_ptr<const Dataset> Store::dataset(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = datasets_.find(id);
  if (it == datasets_.end()) throw Error(ErrorCode::kNotFound, "unknown dataset '" + id + "'");
  return it->second;
}

std::shared_ptr<SessionEntry> Store::create_session(const std::string& mode, const std::string& dataset_id,
                                                    const json& config) {
  if (mode != "aa" && mode != "baseline") throw Error(ErrorCode::kInvalidArgument, "mode must be 'aa' or 'baseline'");
  dataset(dataset_id);
  if (!config.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  if (mode == "aa") config_from_json(config);
  if (mode == "baseline" && config.contains("rng_seed") && !config["rng_seed"].is_number_unsigned()) {
    throw Error(ErrorCode::kInvalidArgument, "rng_seed must be a non-negative integer");
  }

  auto entry = std::make_shared<SessionEntry>();
  entry->id = random_id();
  entry->mode = mode;
  entry->dataset_id = dataset_id;
  entry->request = {{"session_id", entry->id}, {"mode", mode}, {"dataset_id", dataset_id}, {"config", config}};
  fs::create_directories(session_dir(entry->id));
  write_json_file(session_dir(entry->id) / "session.json", entry->request);
  {
    std::lock_guard lock(mutex_);
    sessions_.emplace(entry->id, entry);
    ++building_;
    builders_.emplace_back([this, entry] { build(entry, {}); });
  }
  return entry;
}

namespace {

// Every mutating endpoint leaves a prompt drawn; doing the same after a build
// keeps GET requests free of side effects.
void draw_prompt(Session& s) {
  if (s.phase() == Phase::kGuidelines) {
    s.next_guidelines_prompt();
  } else if (s.phase() == Phase::kAnnotation) {
    s.next_annotation_proposal();
  }
}

}  // namespace

void Store::build(const std::shared_ptr<SessionEntry>& entry, const std::vector<AnnotationEvent>& log) {
  try {
    const auto data = dataset(entry->dataset_id);
    const json meta = {{"session_id", entry->id}, {"dataset_id", entry->dataset_id}};
    std::unique_ptr<Session> aa;
    std::unique_ptr<BaselineSession> baseline;
    if (entry->mode == "aa") {
      aa = std::make_unique<Session>(log.empty() ? Session::create(*data, config_from_json(entry->request["config"]),
                                                                   *res_, system_clock(), meta)
                                                 : Session::replay(*data, log, *res_));
    } else {
      const auto seed = entry->request["config"].value("rng_seed", std::uint64_t{0});
      baseline = std::make_unique<BaselineSession>(
          log.empty() ? BaselineSession::create(*data, seed, *res_, system_clock(), meta)
                      : BaselineSession::replay(*data, log, *res_));
    }

    std::lock_guard lock(entry->mutex);
    const auto path = session_dir(entry->id) / "events.jsonl";
    entry->log.open(path, log.empty() ? std::ios::trunc : std::ios::app);
    if (!entry->log) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
    auto* out = &entry->log;
    auto write = [out](const AnnotationEvent& e) { *out << event_to_json(e).dump() << '\n' << std::flush; };
    if (aa) {
      if (log.empty()) {
        for (const auto& e : aa->events()) write(e);
      }
      aa->set_event_listener(write);
      draw_prompt(*aa);
      entry->aa = std::move(aa);
    } else {
      if (log.empty()) {
        for (const auto& e : baseline->events()) write(e);
      }
      baseline->set_event_listener(write);
      baseline->next_item();
      entry->baseline = std::move(baseline);
    }
    entry->status = SessionStatus::kReady;
  } catch (const std::exception& ex) {
    std::lock_guard lock(entry->mutex);
    entry->status = SessionStatus::kFailed;
    entry->error = ex.what();
  }
  --building_;
}

std::shared_ptr<SessionEntry> Store::session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  return it->second;
}

std::vector<std::string> Store::session_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, e] : sessions_) ids.push_back(id);
  return ids;
}

void Store::load_datasets() {
  for (const auto& f : fs::directory_iterator(data_dir_ / "datasets")) {
    if (f.path().extension() != ".jsonl") continue;
    auto d = std::make_shared<const Dataset>(ingest_dataset(f.path()));
    std::lock_guard lock(mutex_);
    datasets_[f.path().stem().string()] = std::move(d);
  }
}

std::shared_ptr<SessionEntry> Store::load_session_dir(const fs::path& dir) {
  std::ifstream req_in(dir / "session.json");
  if (!req_in) throw Error(ErrorCode::kNotFound, "no session in '" + dir.string() + "'");
  auto entry = std::make_shared<SessionEntry>();
  try {
    entry->request = json::parse(req_in);
    entry->id = entry->request.at("session_id").get<std::string>();
    entry->mode = entry->request.at("mode").get<std::string>();
    entry->dataset_id = entry->request.at("dataset_id").get<std::string>();
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, "'" + (dir / "session.json").string() + "': " + ex.what());
  }
  std::vector<AnnotationEvent> log;
  std::ifstream log_in(dir / "events.jsonl");
  if (log_in) log = read_event_log(log_in);
  {
    std::lock_guard lock(mutex_);
    sessions_[entry->id] = entry;
  }
  ++building_;
  build(entry, log);
  return entry;
}

void Store::load() {
  load_datasets();
  std::vector<fs::path> dirs;
  for (const auto& d : fs::directory_iterator(data_dir_ / "sessions")) {
    if (d.is_directory() && safe_id(d.path().filename().string())) dirs.push_back(d.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) load_session_dir(dir);
}

std::shared_ptr<SessionEntry> Store::open_session(const std::string& id) {
  if (!safe_id(id)) throw Error(ErrorCode::kInvalidArgument, "invalid session id '" + id + "'");
  if (!fs::exists(session_dir(id) / "session.json")) throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  load_datasets();
  auto entry = load_session_dir(session_dir(id));
  std::lock_guard lock(entry->mutex);
  if (entry->status == SessionStatus::kFailed) throw Error(ErrorCode::kReplayMismatch, entry->error);
  return entry;
}

void Store::wait_idle() {
  while (building_.load() > 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
}

}  // namespace aa::service
