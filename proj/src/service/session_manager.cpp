#include "pathagent/service/session_manager.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "pathagent/script/sandbox.hpp"

namespace pathagent::service {

namespace fs = std::filesystem;

const char* to_string(ServiceErrorKind k) {
  switch (k) {
    case ServiceErrorKind::UnknownSession: return "UnknownSession";
    case ServiceErrorKind::UnknownRun: return "UnknownRun";
    case ServiceErrorKind::SessionBusy: return "SessionBusy";
    case ServiceErrorKind::SessionClosed: return "SessionClosed";
    case ServiceErrorKind::PathEscape: return "PathEscape";
    case ServiceErrorKind::NotFound: return "NotFound";
    case ServiceErrorKind::BadRequest: return "BadRequest";
  }
  return "ServiceError";
}

const char* to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::idle: return "idle";
    case SessionStatus::running: return "running";
    case SessionStatus::closed: return "closed";
  }
  return "?";
}

std::string random_token() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  std::ostringstream out;
  out << std::hex;
  for (int i = 0; i < 2; ++i) {
    std::uint64_t v = gen();
    for (int b = 60; b >= 0; b -= 4) out << ((v >> b) & 0xF);
  }
  return out.str();
}

namespace {

std::size_t positive_count(const nlohmann::json& v) {
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) throw std::invalid_argument("must be a positive integer");
  return v.get<std::size_t>();
}

}  // namespace

void apply_overrides(agent::AgentConfig& config, const nlohmann::json& overrides) {
  if (overrides.is_null()) return;
  if (!overrides.is_object()) throw ServiceError(ServiceErrorKind::BadRequest, "config overrides must be an object");
  for (const auto& [key, v] : overrides.items()) {
    try {
      if (key == "max_steps") {
        config.max_steps = positive_count(v);
      } else if (key == "mode") {
        config.mode = agent::mode_from_string(v.get<std::string>());
      } else if (key == "reset_memory_after_query") {
        config.reset_memory_after_query = v.get<bool>();
      } else if (key == "tool_categories") {
        if (v.is_null()) {
          config.tool_categories.reset();
        } else {
          std::set<tools::Category> cats;
          for (const auto& c : v) cats.insert(tools::category_from_string(c.get<std::string>()));
          config.tool_categories = cats;
        }
      } else if (key == "special_instructions") {
        config.special_instructions = v.get<std::string>();
      } else if (key == "web_search_stub") {
        config.web_search_stub = v.get<bool>();
      } else if (key == "observation_cap") {
        config.observation_cap = positive_count(v);
      } else if (key == "time_budget_seconds") {
        if (v.is_null()) {
          config.time_budget_seconds.reset();
        } else {
          config.time_budget_seconds = v.get<double>();
        }
      } else {
        throw std::invalid_argument("unknown setting");
      }
    } catch (const std::exception& e) {
      throw ServiceError(ServiceErrorKind::BadRequest, "config." + key + ": " + e.what());
    }
  }
}

SessionManager::SessionManager(ManagerOptions options, AdapterFactory adapters,
                               const tools::Registry* registry)
    : options_(std::move(options)), adapters_(std::move(adapters)), registry_(registry) {
  if (!registry_ || registry_->empty()) {
    if (options_.defaults.mode == agent::Mode::with_tools) options_.defaults.mode = agent::Mode::iterative;
  }
  fs::create_directories(options_.root / "sessions");
}

SessionManager::~SessionManager() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mu_);
    for (auto& [_, s] : sessions_) {
      s->stop_requested = true;
      all.push_back(s);
    }
  }
  for (auto& s : all) {
    if (s->worker.joinable()) s->worker.join();
  }
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(ServiceErrorKind::UnknownSession, "unknown session: " + id);
  return it->second;
}

std::string SessionManager::create_session(const nlohmann::json& overrides) {
  expire_idle();
  auto s = std::make_shared<Session>();
  s->config = options_.defaults;
  apply_overrides(s->config, overrides);
  s->id = random_token();
  s->working_dir = fs::absolute(options_.root / "sessions" / s->id).lexically_normal();
  s->created_at = std::chrono::system_clock::now();
  s->last_active = std::chrono::steady_clock::now();
  s->adapter = adapters_(s->id);
  try {
    s->agent = std::make_unique<agent::Agent>(s->config, *s->adapter, registry_);
  } catch (const std::invalid_argument& e) {
    throw ServiceError(ServiceErrorKind::BadRequest, e.what());
  }
  fs::create_directories(s->working_dir);
  std::lock_guard lock(mu_);
  sessions_.emplace(s->id, s);
  return s->id;
}

std::string SessionManager::post_query(const std::string& session_id, const std::string& query) {
  std::unique_lock lock(mu_);
  auto s = find(session_id);
  if (s->status == SessionStatus::closed) {
    throw ServiceError(ServiceErrorKind::SessionClosed, "session is closed: " + session_id);
  }
  if (s->status == SessionStatus::running) {
    throw ServiceError(ServiceErrorKind::SessionBusy, "a query is already running in " + session_id);
  }
  if (s->worker.joinable()) s->worker.join();  // previous query has finished
  auto run = std::make_shared<Run>();
  run->id = "run" + std::to_string(++s->run_counter);
  s->runs.emplace(run->id, run);
  s->status = SessionStatus::running;
  s->stop_requested = false;
  s->last_active = std::chrono::steady_clock::now();

  s->worker = std::thread([this, s, run, query] {
    agent::RunHooks hooks;
    hooks.on_step = [this, run](const agent::AgentStep& step) {
      std::lock_guard guard(mu_);
      run->events.push_back({run->events.size() + 1, "step", agent::step_to_json(step).dump()});
      cv_.notify_all();
    };
    hooks.should_stop = [s] { return s->stop_requested.load(); };
    agent::AgentRun result;
    result.query = query;
    result.working_dir = s->working_dir;
    try {
      result = s->agent->run_query(query, s->working_dir, hooks);
    } catch (const std::exception& e) {
      result.terminated_by = agent::Termination::fatal_error;
      result.fatal_error = e.what();
    }
    auto summary = agent::run_to_json(result);
    summary["run_id"] = run->id;
    summary["session_id"] = s->id;
    std::lock_guard guard(mu_);
    run->events.push_back({run->events.size() + 1, "summary", summary.dump()});
    run->done = true;
    if (s->status == SessionStatus::running) s->status = SessionStatus::idle;
    s->last_active = std::chrono::steady_clock::now();
    cv_.notify_all();
  });
  return run->id;
}

void SessionManager::stop(const std::string& session_id) {
  std::lock_guard lock(mu_);
  auto s = find(session_id);
  if (s->status == SessionStatus::running) s->stop_requested = true;
}

void SessionManager::close_locked(const std::shared_ptr<Session>& s, std::unique_lock<std::mutex>& lock) {
  if (s->status == SessionStatus::closed) return;
  s->stop_requested = true;
  cv_.wait(lock, [&] { return s->status != SessionStatus::running; });
  s->status = SessionStatus::closed;
  lock.unlock();
  if (s->worker.joinable()) s->worker.join();
  std::error_code ec;
  fs::create_directories(options_.root / "archive", ec);
  fs::rename(s->working_dir, options_.root / "archive" / s->id, ec);
  lock.lock();
}

void SessionManager::close(const std::string& session_id) {
  std::unique_lock lock(mu_);
  auto s = find(session_id);
  close_locked(s, lock);
}

void SessionManager::wait_idle(const std::string& session_id) {
  std::unique_lock lock(mu_);
  auto s = find(session_id);
  cv_.wait(lock, [&] { return s->status != SessionStatus::running; });
}

nlohmann::ordered_json SessionManager::describe(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto s = find(session_id);
  nlohmann::ordered_json j;
  j["id"] = s->id;
  j["status"] = to_string(s->status);
  j["created_at"] = std::chrono::duration_cast<std::chrono::seconds>(s->created_at.time_since_epoch()).count();
  j["working_dir"] = s->working_dir.string();
  nlohmann::ordered_json cfg;
  cfg["max_steps"] = s->config.max_steps;
  cfg["mode"] = agent::to_string(s->config.mode);
  cfg["reset_memory_after_query"] = s->config.reset_memory_after_query;
  cfg["web_search_stub"] = s->config.web_search_stub;
  cfg["observation_cap"] = s->config.observation_cap;
  j["config"] = cfg;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& [rid, _] : s->runs) j["runs"].push_back(rid);
  if (s->status != SessionStatus::running) {
    j["transcript_length"] = s->agent->transcript().size();
    j["step_count"] = s->agent->step_count();
  }
  return j;
}

std::vector<StreamEvent> SessionManager::events(const std::string& session_id, const std::string& run_id,
                                                std::size_t after_id, std::chrono::milliseconds wait,
                                                bool& done) {
  std::unique_lock lock(mu_);
  auto s = find(session_id);
  auto it = s->runs.find(run_id);
  if (it == s->runs.end()) throw ServiceError(ServiceErrorKind::UnknownRun, "unknown run: " + run_id);
  auto run = it->second;
  cv_.wait_for(lock, wait, [&] { return run->done || run->events.size() > after_id; });
  std::vector<StreamEvent> out;
  for (std::size_t i = after_id; i < run->events.size(); ++i) out.push_back(run->events[i]);
  done = run->done;
  return out;
}

std::vector<ArtifactInfo> SessionManager::list_artifacts(const std::string& session_id) const {
  fs::path root;
  {
    std::lock_guard lock(mu_);
    auto s = find(session_id);
    if (s->status == SessionStatus::closed) {
      throw ServiceError(ServiceErrorKind::SessionClosed, "session is closed: " + session_id);
    }
    root = s->working_dir;
  }
  std::vector<ArtifactInfo> out;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    ArtifactInfo a;
    a.path = it->path().lexically_relative(root).generic_string();
    a.size = it->file_size();
    auto mtime = it->last_write_time();
    auto sys = std::chrono::time_point_cast<std::chrono::seconds>(
        mtime - fs::file_time_type::clock::now() + std::chrono::system_clock::now());
    a.modified = sys.time_since_epoch().count();
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

std::string SessionManager::read_artifact(const std::string& session_id, const std::string& relative_path) const {
  fs::path root;
  {
    std::lock_guard lock(mu_);
    auto s = find(session_id);
    if (s->status == SessionStatus::closed) {
      throw ServiceError(ServiceErrorKind::SessionClosed, "session is closed: " + session_id);
    }
    root = s->working_dir;
  }
  fs::path rel(relative_path);
  if (relative_path.empty() || rel.is_absolute() || relative_path.find('\0') != std::string::npos) {
    throw ServiceError(ServiceErrorKind::PathEscape, "path must be relative to the working directory");
  }
  for (const auto& part : rel) {
    if (part == "..") throw ServiceError(ServiceErrorKind::PathEscape, "path leaves the working directory");
  }
  std::error_code ec;
  fs::path real = fs::weakly_canonical(root / rel, ec);
  fs::path real_root = fs::weakly_canonical(root, ec);
  if (ec || !script::path_within(real, real_root)) {
    throw ServiceError(ServiceErrorKind::PathEscape, "path leaves the working directory");
  }
  if (!fs::is_regular_file(real)) throw ServiceError(ServiceErrorKind::NotFound, "no such artifact: " + relative_path);
  std::ifstream in(real, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t SessionManager::expire_idle() {
  std::unique_lock lock(mu_);
  const auto now = std::chrono::steady_clock::now();
  std::vector<std::shared_ptr<Session>> stale;
  for (auto& [_, s] : sessions_) {
    if (s->status == SessionStatus::idle && now - s->last_active > options_.idle_ttl) stale.push_back(s);
  }
  for (auto& s : stale) close_locked(s, lock);
  return stale.size();
}

}  // namespace pathagent::service
