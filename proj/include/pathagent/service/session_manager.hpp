#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pathagent/agent/agent.hpp"
#include "pathagent/model/chat.hpp"
#include "pathagent/tools/registry.hpp"

namespace pathagent::service {

enum class ServiceErrorKind {
  UnknownSession,
  UnknownRun,
  SessionBusy,
  SessionClosed,
  PathEscape,
  NotFound,
  BadRequest,
};
const char* to_string(ServiceErrorKind k);

class ServiceError : public std::runtime_error {
 public:
  ServiceError(ServiceErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ServiceErrorKind kind() const { return kind_; }

 private:
  ServiceErrorKind kind_;
};

enum class SessionStatus { idle, running, closed };
const char* to_string(SessionStatus s);

/// One server-push event. `id` is the 1-based position within its run.
struct StreamEvent {
  std::size_t id = 0;
  std::string event;  // "step" or "summary"
  std::string data;   // JSON
};

struct ArtifactInfo {
  std::string path;  // relative, '/'-separated
  std::uintmax_t size = 0;
  std::int64_t modified = 0;  // seconds since the epoch
};

/// Builds a fresh model adapter for a new session.
using AdapterFactory = std::function<std::unique_ptr<model::ModelAdapter>(const std::string& session_id)>;

struct ManagerOptions {
  std::filesystem::path root;  // sessions/<id> and archive/<id> live here
  agent::AgentConfig defaults = agent::AgentConfig::case_study();
  std::chrono::seconds idle_ttl{2 * 60 * 60};
};

/// Interactive agent sessions. All public methods are thread-safe. Each
/// session runs at most one query at a time on its own worker thread.
class SessionManager {
 public:
  SessionManager(ManagerOptions options, AdapterFactory adapters, const tools::Registry* registry);
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// `overrides` may set max_steps, mode, reset_memory_after_query,
  /// tool_categories, special_instructions, web_search_stub,
  /// observation_cap and time_budget_seconds. Throws BadRequest.
  std::string create_session(const nlohmann::json& overrides = nlohmann::json::object());

  /// Starts a query; returns its run id immediately.
  std::string post_query(const std::string& session_id, const std::string& query);

  /// Asks the running query to stop before its next step.
  void stop(const std::string& session_id);

  /// Cancels any running query, waits for it, and archives the working dir.
  void close(const std::string& session_id);

  nlohmann::ordered_json describe(const std::string& session_id) const;

  /// Events of a run with id > after_id. Blocks up to `wait` for new events
  /// while the run is live. `done` is set once the summary has been emitted.
  std::vector<StreamEvent> events(const std::string& session_id, const std::string& run_id,
                                  std::size_t after_id, std::chrono::milliseconds wait, bool& done);

  std::vector<ArtifactInfo> list_artifacts(const std::string& session_id) const;
  /// Contents of a file inside the session's working dir. Throws PathEscape
  /// for anything that resolves outside it.
  std::string read_artifact(const std::string& session_id, const std::string& relative_path) const;

  /// Closes sessions idle for longer than the TTL; returns how many.
  std::size_t expire_idle();

  /// Blocks until the session is idle again.
  void wait_idle(const std::string& session_id);

 private:
  struct Run {
    std::string id;
    std::vector<StreamEvent> events;
    bool done = false;
  };
  struct Session {
    std::string id;
    agent::AgentConfig config;
    std::filesystem::path working_dir;
    SessionStatus status = SessionStatus::idle;
    std::chrono::system_clock::time_point created_at;
    std::chrono::steady_clock::time_point last_active;
    std::unique_ptr<model::ModelAdapter> adapter;
    std::unique_ptr<agent::Agent> agent;
    std::map<std::string, std::shared_ptr<Run>> runs;
    std::size_t run_counter = 0;
    std::atomic<bool> stop_requested{false};
    std::thread worker;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  void close_locked(const std::shared_ptr<Session>& s, std::unique_lock<std::mutex>& lock);

  ManagerOptions options_;
  AdapterFactory adapters_;
  const tools::Registry* registry_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// Parses the override object onto `config`. Throws BadRequest.
void apply_overrides(agent::AgentConfig& config, const nlohmann::json& overrides);

/// Random 128-bit hex token.
std::string random_token();

}  // namespace pathagent::service
