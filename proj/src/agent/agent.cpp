#include "pathagent/agent/agent.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "pathagent/agent/prompt.hpp"
#include "pathagent/script/host.hpp"
#include "pathagent/script/value_json.hpp"

namespace pathagent::agent {

namespace fs = std::filesystem;
using script::Value;

const char* to_string(Mode m) {
  switch (m) {
    case Mode::llm_only: return "llm_only";
    case Mode::single_shot: return "single_shot";
    case Mode::iterative: return "iterative";
    case Mode::with_tools: return "with_tools";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  for (Mode m : {Mode::llm_only, Mode::single_shot, Mode::iterative, Mode::with_tools}) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown mode: " + std::string(s));
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::final_answer: return "final_answer";
    case Termination::step_cap: return "step_cap";
    case Termination::fatal_error: return "fatal_error";
  }
  return "?";
}

AgentConfig AgentConfig::case_study() {
  AgentConfig c;
  c.max_steps = 200;
  c.reset_memory_after_query = false;
  c.web_search_stub = true;
  return c;
}

void AgentConfig::validate(bool has_tools) const {
  if (max_steps == 0) throw std::invalid_argument("max_steps must be >= 1");
  if (mode == Mode::with_tools && !has_tools) {
    throw std::invalid_argument("with_tools mode needs a non-empty tool registry");
  }
  if (time_budget_seconds && *time_budget_seconds <= 0) {
    throw std::invalid_argument("time budget must be positive");
  }
  script::InterpreterLimits probe = limits;
  if (probe.working_dir.empty()) probe.working_dir = fs::current_path();  // set per query
  probe.validate();
}

nlohmann::ordered_json answer_to_json(const Value& v) {
  try {
    return script::to_json(v);
  } catch (const std::exception&) {
    return script::repr(v);
  }
}

nlohmann::ordered_json step_to_json(const AgentStep& s, bool with_duration) {
  nlohmann::ordered_json j;
  j["index"] = s.index;
  j["thought"] = s.thought;
  j["code"] = s.code;
  j["observation"] = s.observation;
  j["operations_used"] = s.operations_used;
  j["is_final"] = s.is_final;
  if (with_duration) j["duration"] = s.duration;
  return j;
}

nlohmann::ordered_json run_to_json(const AgentRun& r) {
  nlohmann::ordered_json j;
  j["query"] = r.query;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : r.steps) j["steps"].push_back(step_to_json(s));
  j["final_answer"] = r.final_answer ? answer_to_json(*r.final_answer) : nlohmann::ordered_json();
  j["working_dir"] = r.working_dir.string();
  j["terminated_by"] = to_string(r.terminated_by);
  j["total_duration"] = r.total_duration;
  j["fatal_error"] = r.fatal_error;
  j["cancelled"] = r.cancelled;
  j["time_budget_exceeded"] = r.time_budget_exceeded;
  return j;
}

std::string cap_output(const std::string& text, std::size_t cap) {
  if (text.size() <= cap) return text;
  auto boundary = [&](std::size_t i) {
    // back up to the start of a UTF-8 sequence
    while (i > 0 && i < text.size() && (static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) --i;
    return i;
  };
  std::size_t head = boundary(cap / 2);
  std::size_t tail = boundary(text.size() - (cap - cap / 2));
  if (tail < head) tail = head;
  return text.substr(0, head) + "\n... [" + std::to_string(tail - head) +
         " bytes truncated] ...\n" + text.substr(tail);
}

Agent::Agent(AgentConfig config, model::ModelAdapter& adapter, const tools::Registry* registry)
    : config_(std::move(config)), adapter_(adapter), registry_(registry) {
  const bool uses_tools = config_.mode == Mode::with_tools;
  config_.validate(registry_ && !registry_->empty());
  std::string general = config_.general_instructions.empty()
                            ? default_general_instructions(config_.limits)
                            : config_.general_instructions;
  system_prompt_ = build_system_prompt(general, uses_tools ? registry_ : nullptr,
                                       config_.tool_categories, config_.special_instructions,
                                       config_.web_search_stub ? web_search_doc() : std::string());
  reset();
}

void Agent::reset() {
  transcript_.clear();
  step_counter_ = 0;
  script::Bindings bindings;
  if (config_.mode == Mode::with_tools && registry_) {
    bindings = registry_->script_bindings(config_.tool_categories);
  }
  if (config_.web_search_stub) {
    bindings.emplace("web_search", script::make_function("web_search", [](script::Interpreter&,
                                                                          script::CallArgs& args) {
      auto bound = script::bind_arguments("web_search", args, {"query"}, 1);
      return Value::string("web search is not available in this environment; no results for: " +
                           script::str(*bound[0]));
    }));
  }
  session_ = std::make_unique<script::ScriptSession>(std::move(bindings));
}

nlohmann::ordered_json Agent::snapshot() const {
  nlohmann::ordered_json j;
  j["step_count"] = step_counter_;
  j["transcript"] = nlohmann::ordered_json::array();
  for (const auto& m : transcript_) j["transcript"].push_back({{"role", model::to_string(m.role)}, {"content", m.content}});
  j["globals"] = nlohmann::ordered_json::object();
  for (const auto& name : session_->global_names()) j["globals"][name] = script::repr(*session_->global(name));
  return j;
}

std::string Agent::observe(const script::ExecutionResult& result) const {
  std::string out = cap_output(result.stdout_text, config_.observation_cap);
  auto add_line = [&](const std::string& line) {
    if (!out.empty() && out.back() != '\n') out += "\n";
    out += line;
  };
  if (result.error) add_line("Error: " + result.error->render());
  if (result.final_answer) add_line("Final answer: " + script::repr(*result.final_answer));
  if (out.empty()) out = "Execution finished with no output.";
  return out;
}

std::string Agent::scrub(std::string text, const fs::path& working_dir) const {
  std::vector<std::pair<std::string, std::string>> aliases = config_.log_aliases;
  aliases.emplace_back(working_dir.string(), "{working_dir}");
  std::stable_sort(aliases.begin(), aliases.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  for (const auto& [from, to] : aliases) {
    if (from.empty()) continue;
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
      text.replace(pos, from.size(), to);
    }
  }
  return text;
}

void Agent::persist(const AgentRun& run) const {
  // steps.jsonl leaves out durations so that replayed runs log identical bytes;
  // the timings are kept in run.json.
  std::ofstream steps(run.working_dir / "steps.jsonl", std::ios::trunc);
  for (const auto& s : run.steps) {
    AgentStep logged = s;
    logged.thought = scrub(s.thought, run.working_dir);
    logged.code = scrub(s.code, run.working_dir);
    logged.observation = scrub(s.observation, run.working_dir);
    steps << step_to_json(logged, false).dump() << "\n";
  }
  auto summary = run_to_json(run);
  summary["query"] = scrub(run.query, run.working_dir);
  summary["working_dir"] = "{working_dir}";
  for (auto& s : summary["steps"]) {
    for (const char* key : {"thought", "code", "observation"}) {
      s[key] = scrub(s[key].get<std::string>(), run.working_dir);
    }
  }
  summary["mode"] = to_string(config_.mode);
  std::ofstream out(run.working_dir / "run.json", std::ios::trunc);
  out << summary.dump(2) << "\n";
}

AgentRun Agent::run_query(const std::string& query, const fs::path& working_dir,
                          const RunHooks& hooks) {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - started).count(); };

  AgentRun run;
  run.query = query;
  fs::create_directories(working_dir);
  run.working_dir = fs::absolute(working_dir).lexically_normal();

  if (transcript_.empty()) transcript_.push_back({model::Role::system, system_prompt_});
  transcript_.push_back({model::Role::user, query});

  script::InterpreterLimits limits = config_.limits;
  limits.working_dir = run.working_dir;

  bool finished = false;
  for (std::size_t k = 0; k < config_.max_steps && !finished; ++k) {
    if (hooks.should_stop && hooks.should_stop()) {
      run.cancelled = true;
      break;
    }
    if (config_.time_budget_seconds) {
      double remaining = *config_.time_budget_seconds - elapsed();
      if (remaining <= 0) {
        run.time_budget_exceeded = true;
        break;
      }
      limits.wall_clock_cap = config_.limits.wall_clock_cap
                                  ? std::min(*config_.limits.wall_clock_cap, remaining)
                                  : remaining;
    }

    const auto step_started = clock::now();
    model::StepOutput out;
    try {
      out = adapter_.complete_step(transcript_);
    } catch (const std::exception& e) {
      run.terminated_by = Termination::fatal_error;
      run.fatal_error = e.what();
      finished = true;
      break;
    }

    AgentStep step;
    step.index = ++step_counter_;
    step.thought = out.thought;
    step.code = out.code;
    transcript_.push_back(
        {model::Role::assistant,
         nlohmann::ordered_json{{"thought", out.thought}, {"code", out.code}}.dump()});

    if (config_.mode == Mode::llm_only) {
      // The reply itself is the answer; nothing is executed.
      step.is_final = true;
      run.final_answer = Value::string(out.code.empty() ? out.thought : out.code);
      run.terminated_by = Termination::final_answer;
      finished = true;
    } else {
      auto result = session_->run_source(out.code, limits);
      step.observation = observe(result);
      step.operations_used = result.operations_used;
      transcript_.push_back({model::Role::observation, step.observation});
      if (result.final_answer) {
        step.is_final = true;
        run.final_answer = result.final_answer;
        run.terminated_by = Termination::final_answer;
        finished = true;
      } else if (config_.mode == Mode::single_shot) {
        finished = true;  // one execution only
      }
    }
    step.duration = std::chrono::duration<double>(clock::now() - step_started).count();
    run.steps.push_back(step);
    if (hooks.on_step) hooks.on_step(run.steps.back());
  }

  if (config_.time_budget_seconds && !run.time_budget_exceeded &&
      run.terminated_by != Termination::final_answer && elapsed() > *config_.time_budget_seconds) {
    run.time_budget_exceeded = true;
  }
  run.total_duration = elapsed();
  persist(run);
  if (config_.reset_memory_after_query) reset();
  return run;
}

}  // namespace pathagent::agent
