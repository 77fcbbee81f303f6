#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pathagent/model/chat.hpp"
#include "pathagent/script/interpreter.hpp"
#include "pathagent/tools/registry.hpp"

namespace pathagent::agent {

enum class Mode { llm_only, single_shot, iterative, with_tools };
const char* to_string(Mode m);
/// Throws std::invalid_argument.
Mode mode_from_string(std::string_view s);

enum class Termination { final_answer, step_cap, fatal_error };
const char* to_string(Termination t);

struct AgentConfig {
  std::size_t max_steps = 20;
  Mode mode = Mode::with_tools;
  std::optional<std::set<tools::Category>> tool_categories;
  /// Empty means the bundled asset.
  std::string general_instructions;
  std::string special_instructions;
  bool reset_memory_after_query = true;
  script::InterpreterLimits limits;
  /// Stdout bytes kept per observation; the head and tail halves survive.
  std::size_t observation_cap = 8 * 1024;
  /// Bind a web_search stub and document it in the prompt.
  bool web_search_stub = false;
  /// Whole-query wall-clock budget, checked between steps and passed to the
  /// interpreter as its cap.
  std::optional<double> time_budget_seconds;
  /// Absolute path prefixes replaced by placeholders in persisted logs, in
  /// addition to the working directory ("{working_dir}").
  std::vector<std::pair<std::string, std::string>> log_aliases;

  /// 200 steps, memory kept across queries, web_search stub.
  static AgentConfig case_study();
  /// Throws std::invalid_argument.
  void validate(bool has_tools) const;
};

struct AgentStep {
  std::size_t index = 0;  // 1-based; continues across queries while memory is kept
  std::string thought;
  std::string code;
  std::string observation;
  std::uint64_t operations_used = 0;
  bool is_final = false;
  double duration = 0;
};

struct AgentRun {
  std::string query;
  std::vector<AgentStep> steps;
  std::optional<script::Value> final_answer;
  std::filesystem::path working_dir;
  Termination terminated_by = Termination::step_cap;
  double total_duration = 0;
  std::string fatal_error;
  bool cancelled = false;
  bool time_budget_exceeded = false;
};

/// JSON forms shared by the run logs and the HTTP service.
nlohmann::ordered_json step_to_json(const AgentStep& s, bool with_duration = true);
nlohmann::ordered_json run_to_json(const AgentRun& r);
nlohmann::ordered_json answer_to_json(const script::Value& v);

struct RunHooks {
  /// Called after each step is recorded.
  std::function<void(const AgentStep&)> on_step;
  /// Polled before each step; true cancels the query.
  std::function<bool()> should_stop;
};

/// Truncates to `cap` bytes keeping the head and tail, on UTF-8 boundaries.
std::string cap_output(const std::string& text, std::size_t cap);

/// The iterative thought/code loop. Single-threaded; one instance per
/// session or query.
class Agent {
 public:
  Agent(AgentConfig config, model::ModelAdapter& adapter, const tools::Registry* registry);

  /// Runs one query with `working_dir` as the interpreter's root. Writes
  /// steps.jsonl and run.json there.
  AgentRun run_query(const std::string& query, const std::filesystem::path& working_dir,
                     const RunHooks& hooks = {});

  /// Clears memory and interpreter state; step numbering restarts at 1.
  void reset();

  const model::Transcript& transcript() const { return transcript_; }
  const std::string& system_prompt() const { return system_prompt_; }
  const AgentConfig& config() const { return config_; }
  std::size_t step_count() const { return step_counter_; }
  /// Transcript, step counter and script globals (name -> repr) as JSON.
  /// Two agents with equal snapshots behave identically on the next query.
  nlohmann::ordered_json snapshot() const;

 private:
  std::string observe(const script::ExecutionResult& result) const;
  std::string scrub(std::string text, const std::filesystem::path& working_dir) const;
  void persist(const AgentRun& run) const;

  AgentConfig config_;
  model::ModelAdapter& adapter_;
  const tools::Registry* registry_;
  std::string system_prompt_;
  model::Transcript transcript_;
  std::unique_ptr<script::ScriptSession> session_;
  std::size_t step_counter_ = 0;
};

}  // namespace pathagent::agent
