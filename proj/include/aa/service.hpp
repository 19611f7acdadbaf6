#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "aa/baseline.hpp"
#include "aa/labeling.hpp"
#include "aa/session.hpp"

namespace httplib {
class Server;
}

namespace aa::service {

enum class SessionStatus { kBuilding, kReady, kFailed };
const char* status_name(SessionStatus s);

// One hosted session. All reads and writes of the session go through `mutex`.
struct SessionEntry {
  std::string id;
  std::string mode;  // "aa" or "baseline"
  std::string dataset_id;
  nlohmann::json request;  // creation request, persisted for rebuilds

  std::mutex mutex;
  SessionStatus status = SessionStatus::kBuilding;
  std::string error;
  std::unique_ptr<Session> aa;
  std::unique_ptr<BaselineSession> baseline;
  std::ofstream log;

  std::uint64_t version() const;
};

// Datasets and sessions under a data directory:
//   datasets/<id>.jsonl
//   sessions/<id>/session.json   creation request
//   sessions/<id>/events.jsonl   append-only event log
class Store {
 public:
  Store(std::filesystem::path data_dir, const labeling::Resources& res);
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& data_dir() const { return data_dir_; }

  // Parses and stores a JSONL dataset; the id is derived from the content.
  std::string add_dataset(const std::string& jsonl);
  std::shared_ptr<const Dataset> dataset(const std::string& id) const;

  // Validates the request and starts the pipeline in the background.
  std::shared_ptr<SessionEntry> create_session(const std::string& mode, const std::string& dataset_id,
                                               const nlohmann::json& config);
  std::shared_ptr<SessionEntry> session(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  // Rebuilds every persisted session by replaying its event log.
  void load();
  // Loads the datasets and replays one session, synchronously.
  std::shared_ptr<SessionEntry> open_session(const std::string& id);

  // Blocks until no background build is running.
  void wait_idle();

 private:
  void build(const std::shared_ptr<SessionEntry>& entry, const std::vector<AnnotationEvent>& log);
  std::filesystem::path session_dir(const std::string& id) const;
  void load_datasets();
  std::shared_ptr<SessionEntry> load_session_dir(const std::filesystem::path& dir);

  std::filesystem::path data_dir_;
  const labeling::Resources* res_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;
  std::vector<std::thread> builders_;
  std::atomic<std::size_t> building_{0};
};

struct ServerOptions {
  std::filesystem::path static_dir;  // served under "/" when non-empty
  std::size_t max_upload_bytes = 50u << 20;
};

class Server {
 public:
  Server(Store& store, ServerOptions options = {});
  ~Server();

  // Blocks serving requests until stop().
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  void routes();

  Store& store_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> http_;
};

// Parses "host:port" (host may be omitted: ":8080").
std::pair<std::string, int> parse_listen(const std::string& spec);

}  // namespace aa::service
