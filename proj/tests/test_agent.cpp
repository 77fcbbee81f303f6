#include <doctest.h>

#include <fstream>

#include "pathagent/agent/agent.hpp"
#include "pathagent/agent/prompt.hpp"
#include "pathagent/model/replay_adapter.hpp"
#include "pathagent/tools/catalog.hpp"
#include "support.hpp"

using namespace pathagent;
using namespace pathagent::agent;
using pathagent::testing::TempDir;
namespace fs = std::filesystem;

namespace {

/// Replay that also keeps a copy of every transcript it was shown.
class RecordingAdapter : public model::ModelAdapter {
 public:
  explicit RecordingAdapter(std::vector<model::StepOutput> steps) : replay_(std::move(steps)) {}
  model::StepOutput complete_step(const model::Transcript& t) override {
    seen.push_back(t);
    return replay_.complete_step(t);
  }
  std::vector<model::Transcript> seen;

 private:
  model::ReplayAdapter replay_;
};

const tools::Registry& registry() {
  static const tools::Registry r = tools::default_registry(testing::minibench_dir() / "dataset");
  return r;
}

AgentConfig config(Mode mode) {
  AgentConfig c;
  c.mode = mode;
  return c;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("final answer on the first step") {
  TempDir wd;
  model::ReplayAdapter adapter(testing::steps({{"done", "final_answer(42)"}}));
  Agent agent(config(Mode::iterative), adapter, nullptr);
  auto run = agent.run_query("q", wd.path());
  REQUIRE(run.steps.size() == 1);
  CHECK(run.terminated_by == Termination::final_answer);
  REQUIRE(run.final_answer);
  CHECK(run.final_answer->as_int() == 42);
  CHECK(run.steps[0].is_final);
  CHECK(lines_of(wd.path() / "steps.jsonl").size() == 1);
  CHECK(fs::exists(wd.path() / "run.json"));
}

TEST_CASE("step cap") {
  TempDir wd;
  std::vector<std::pair<std::string, std::string>> pairs(25, {"again", "x = 1"});
  RecordingAdapter adapter(testing::steps(pairs));
  Agent agent(config(Mode::iterative), adapter, nullptr);
  auto run = agent.run_query("q", wd.path());
  CHECK(run.steps.size() == 20);
  CHECK(run.terminated_by == Termination::step_cap);
  CHECK_FALSE(run.final_answer);
  CHECK(run.steps.back().index == 20);
  // memory fidelity: system, query, then one (reply, observation) pair per prior step
  for (std::size_t k = 0; k < adapter.seen.size(); ++k) {
    const auto& t = adapter.seen[k];
    REQUIRE(t.size() == 2 + 2 * k);
    CHECK(t[0].role == model::Role::system);
    CHECK(t[1].content == "q");
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(t[2 + 2 * j].role == model::Role::assistant);
      CHECK(t[3 + 2 * j].role == model::Role::observation);
      CHECK(t[3 + 2 * j].content == run.steps[j].observation);
    }
  }
}

TEST_CASE("mode ladder") {
  TempDir wd;
  auto two = testing::steps({{"first", "print('one')"}, {"second", "final_answer(2)"}});
  {
    model::ReplayAdapter adapter(two);
    Agent agent(config(Mode::single_shot), adapter, nullptr);
    auto run = agent.run_query("q", wd.path() / "single");
    CHECK(run.steps.size() == 1);
    CHECK(run.steps[0].observation == "one\n");
    CHECK(adapter.served() == 1);
  }
  {
    model::ReplayAdapter adapter(testing::steps({{"The answer is 4.", ""}}));
    auto cfg = config(Mode::llm_only);
    cfg.reset_memory_after_query = false;
    Agent agent(cfg, adapter, nullptr);
    auto run = agent.run_query("q", wd.path() / "llm");
    REQUIRE(run.steps.size() == 1);
    CHECK(run.steps[0].operations_used == 0);
    CHECK(run.steps[0].observation.empty());
    CHECK(script::str(*run.final_answer) == "The answer is 4.");
    CHECK(agent.transcript().size() == 3);
  }
  {
    model::ReplayAdapter adapter(two);
    Agent agent(config(Mode::iterative), adapter, nullptr);
    CHECK(agent.run_query("q", wd.path() / "iter").steps.size() == 2);
  }
  model::ReplayAdapter adapter(two);
  CHECK_THROWS_AS(Agent(config(Mode::with_tools), adapter, nullptr), std::invalid_argument);
  tools::Registry empty;
  CHECK_THROWS_AS(Agent(config(Mode::with_tools), adapter, &empty), std::invalid_argument);
  auto zero = config(Mode::iterative);
  zero.max_steps = 0;
  CHECK_THROWS_AS(Agent(zero, adapter, nullptr), std::invalid_argument);
}

TEST_CASE("forbidden import then a fix") {
  TempDir wd;
  model::ReplayAdapter adapter(testing::steps({
      {"list files", "import os\nprint(os.listdir('.'))"},
      {"use pathlib", "from pathlib import Path\nprint(sorted(p.name for p in Path('.').iterdir()))"},
  }));
  Agent agent(config(Mode::iterative), adapter, nullptr);
  auto run = agent.run_query("q", wd.path());
  REQUIRE(run.steps.size() == 2);
  CHECK(run.steps[0].observation.find("ForbiddenImport") != std::string::npos);
  CHECK(run.steps[0].operations_used == 0);
  CHECK(run.steps[1].observation.find("Error") == std::string::npos);
}

TEST_CASE("adapter failure is fatal") {
  TempDir wd;
  model::ReplayAdapter adapter(testing::steps({{"a", "x = 1"}}));
  Agent agent(config(Mode::iterative), adapter, nullptr);
  auto run = agent.run_query("q", wd.path());
  CHECK(run.terminated_by == Termination::fatal_error);
  CHECK(run.steps.size() == 1);
  CHECK(run.fatal_error.find("exhausted") != std::string::npos);
}

TEST_CASE("reset isolates queries") {
  TempDir root;
  const auto pairs = std::vector<std::pair<std::string, std::string>>{
      {"write", "Path('answer.json').write_text(json.dumps({'n': 1}))\nseen = 1"},
      {"done", "final_answer(seen)"}};
  auto recorded = testing::steps(pairs);
  for (auto& s : recorded) s.code = "import json\nfrom pathlib import Path\n" + s.code;
  const auto once = recorded;
  recorded.insert(recorded.end(), once.begin(), once.end());
  model::ReplayAdapter adapter(recorded);
  Agent agent(config(Mode::iterative), adapter, nullptr);
  const auto fresh = agent.snapshot();
  agent.reset();
  CHECK(agent.snapshot() == fresh);

  auto first = agent.run_query("q", root.path() / "a");
  CHECK(agent.snapshot() == fresh);
  auto second = agent.run_query("q", root.path() / "b");
  REQUIRE(first.steps.size() == second.steps.size());
  for (std::size_t i = 0; i < first.steps.size(); ++i) {
    CHECK(first.steps[i].index == second.steps[i].index);
    CHECK(first.steps[i].observation == second.steps[i].observation);
  }
  CHECK(testing::read_file(root.path() / "a/steps.jsonl") == testing::read_file(root.path() / "b/steps.jsonl"));
  CHECK(fs::exists(root.path() / "a/answer.json"));
}

TEST_CASE("memory is kept without reset") {
  TempDir root;
  auto cfg = AgentConfig::case_study();
  cfg.mode = Mode::iterative;
  CHECK(cfg.max_steps == 200);
  model::ReplayAdapter adapter(testing::steps({
      {"define", "x = 20"},
      {"done", "final_answer(x)"},
      {"reuse", "final_answer(x + 1)"},
  }));
  Agent agent(cfg, adapter, nullptr);
  auto first = agent.run_query("first", root.path() / "1");
  auto second = agent.run_query("second", root.path() / "2");
  CHECK(script::repr(*second.final_answer) == "21");
  CHECK(second.steps.front().index == 3);
  // system + 2 x (query + 2 pairs) for the first query, query + 1 pair for the second
  CHECK(agent.transcript().size() == 1 + (1 + 4) + (1 + 2));
  CHECK(agent.transcript()[2].content.find("x = 20") != std::string::npos);
  CHECK(agent.snapshot()["globals"]["x"] == "20");
  CHECK(agent.system_prompt().find("web_search") != std::string::npos);
}

TEST_CASE("system prompt composition") {
  auto general = default_general_instructions({});
  auto special = default_special_instructions({});
  auto bare = build_system_prompt("GENERAL", nullptr, {}, "");
  CHECK(bare == "GENERAL\n\n" + std::string(kToolsHeader) + "\n");
  auto full = build_system_prompt(general, &registry(), {}, special);
  CHECK(full.find(general) == 0);
  CHECK(full.find(kToolsHeader) < full.find("## Security Restrictions"));
  CHECK(full.find("Strict restrictions:") != std::string::npos);
  for (const auto& t : registry().tools()) CHECK(full.find("def " + t.descriptor.name + "(") != std::string::npos);
  auto nuclei = build_system_prompt(general, &registry(), std::set{tools::Category::nuclei_contour}, "");
  std::size_t blocks = 0;
  for (auto p = nuclei.find("\ndef "); p != std::string::npos; p = nuclei.find("\ndef ", p + 1)) ++blocks;
  CHECK(blocks == 4);

  model::ReplayAdapter adapter(testing::steps({}));
  Agent iterative(config(Mode::iterative), adapter, &registry());
  CHECK(iterative.system_prompt().find("def get_contour_area(") == std::string::npos);
  Agent with_tools(config(Mode::with_tools), adapter, &registry());
  CHECK(with_tools.system_prompt().find("def get_contour_area(") != std::string::npos);
}

TEST_CASE("with_tools binds the registry") {
  TempDir wd;
  model::ReplayAdapter adapter(testing::steps(
      {{"area", "r = get_contour_area([(0, 0), (4, 0), (0, 3)])\nfinal_answer(r['contour_area'])"}}));
  Agent agent(config(Mode::with_tools), adapter, &registry());
  auto run = agent.run_query("q", wd.path());
  REQUIRE(run.final_answer);
  CHECK(run.final_answer->as_double() == 6.0);
}

TEST_CASE("observation cap") {
  CHECK(cap_output("short", 10) == "short");
  std::string big(20000, 'a');
  big += std::string(20000, 'z');
  auto capped = cap_output(big, 8192);
  CHECK(capped.substr(0, 4096) == std::string(4096, 'a'));
  CHECK(capped.substr(capped.size() - 4096) == std::string(4096, 'z'));
  CHECK(capped.find("[31808 bytes truncated]") != std::string::npos);
  std::string utf8;
  for (int i = 0; i < 100; ++i) utf8 += "\xc3\xa9";  // e-acute
  auto cut = cap_output(utf8, 51);
  CHECK(cut.substr(0, 24) == utf8.substr(0, 24));

  TempDir wd;
  model::ReplayAdapter adapter(testing::steps({{"loud", "print('x' * 100000)"}}));
  auto cfg = config(Mode::single_shot);
  Agent agent(cfg, adapter, nullptr);
  auto run = agent.run_query("q", wd.path());
  CHECK(run.steps[0].observation.size() < 8300);
}

TEST_CASE("logs hide machine paths") {
  TempDir wd;
  model::ReplayAdapter adapter(testing::steps({{"where", "print('" + wd.path().string() + "/x')"}}));
  Agent agent(config(Mode::single_shot), adapter, nullptr);
  agent.run_query("q", wd.path());
  auto logged = testing::read_file(wd.path() / "steps.jsonl");
  CHECK(logged.find(wd.path().string()) == std::string::npos);
  CHECK(logged.find("{working_dir}/x") != std::string::npos);
}

TEST_CASE("cancellation and hooks") {
  TempDir wd;
  std::vector<std::pair<std::string, std::string>> pairs(5, {"loop", "x = 1"});
  model::ReplayAdapter adapter(testing::steps(pairs));
  Agent agent(config(Mode::iterative), adapter, nullptr);
  int seen = 0;
  RunHooks hooks;
  hooks.on_step = [&](const AgentStep&) { ++seen; };
  hooks.should_stop = [&] { return seen == 2; };
  auto run = agent.run_query("q", wd.path(), hooks);
  CHECK(run.cancelled);
  CHECK(run.steps.size() == 2);
  CHECK(mode_from_string("single_shot") == Mode::single_shot);
  CHECK_THROWS_AS(mode_from_string("bogus"), std::invalid_argument);
}
