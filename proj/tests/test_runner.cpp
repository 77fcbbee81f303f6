#include <doctest.h>

#include <fstream>

#include "pathagent/runner/runner.hpp"
#include "pathagent/tools/catalog.hpp"
#include "support.hpp"

using namespace pathagent;
using namespace pathagent::runner;
using pathagent::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string replay_dir_for(agent::Mode m) {
  // single_shot replays the iterative recordings and stops after one step
  return m == agent::Mode::single_shot ? "iterative" : agent::to_string(m);
}

RunConfig minibench_config(agent::Mode mode, const fs::path& out) {
  RunConfig c;
  c.suite = testing::minibench_dir() / "questions";
  c.dataset_root = testing::minibench_dir() / "dataset";
  c.mode = mode;
  c.adapter = parse_adapter("replay:" + (testing::minibench_dir() / "replay" / replay_dir_for(mode)).string());
  c.output_dir = out;
  c.trials = 3;
  return c;
}

nlohmann::json expected() {
  return nlohmann::json::parse(testing::read_file(testing::minibench_dir() / "expected_scores.json"));
}

}  // namespace

TEST_CASE("config validation and seeds") {
  CHECK(parse_adapter("wire").kind == AdapterSpec::Kind::wire);
  auto r = parse_adapter("replay:/x/y");
  CHECK(r.kind == AdapterSpec::Kind::replay);
  CHECK(r.replay_path == "/x/y");
  CHECK_THROWS_AS(parse_adapter("replay:"), ConfigError);
  CHECK_THROWS_AS(parse_adapter("grpc"), ConfigError);

  TempDir out;
  auto c = minibench_config(agent::Mode::iterative, out.path());
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.parallelism = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.dataset_root = out.path() / "missing";
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  CHECK(question_seed(42, 1, "q01") == question_seed(42, 1, "q01"));
  CHECK(question_seed(42, 1, "q01") != question_seed(42, 2, "q01"));
  CHECK(question_seed(42, 1, "q01") != question_seed(43, 1, "q01"));
  // FNV-1a 64 of the empty-suffix form "0:0:" computed by hand-rolled reference
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : std::string("0:0:")) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  CHECK(question_seed(0, 0, "") == h);
}

TEST_CASE("suite with truth") {
  auto suite = load_suite_with_truth(testing::minibench_dir() / "questions");
  REQUIRE(suite.size() == 12);
  for (const auto& e : suite) CHECK(e.truth.is_array());
  TempDir empty;
  testing::write_file(empty.path() / "q.json", testing::read_file(testing::minibench_dir() / "questions/q01.json"));
  CHECK_THROWS_AS(load_suite_with_truth(empty.path()), SuiteLoadError);
}

TEST_CASE("perfect replay scores one") {
  TempDir out;
  auto suite = load_suite_with_truth(testing::minibench_dir() / "questions");
  auto c = minibench_config(agent::Mode::with_tools, out.path());
  auto registry = tools::default_registry(c.dataset_root);
  auto result = run_single(suite.front(), c, 1, &registry);
  CHECK(result.score.score == 1.0);
  CHECK_FALSE(result.score.failed);
  CHECK(result.working_dir == out.path() / "trial_1" / suite.front().spec.id);
  for (const char* f : {"steps.jsonl", "run.json", "score.json", "answer.json"}) {
    CHECK(fs::exists(result.working_dir / f));
  }
}

TEST_CASE("mini-suite scores match the oracle") {
  const auto exp = expected();
  for (auto mode : {agent::Mode::llm_only, agent::Mode::single_shot, agent::Mode::iterative, agent::Mode::with_tools}) {
    TempDir out;
    auto outcome = run_benchmark(minibench_config(mode, out.path()));
    INFO(agent::to_string(mode));
    CHECK(outcome.all_completed);
    const auto& e = exp[agent::to_string(mode)];
    for (const auto& [qid, rec] : e["questions"].items()) {
      INFO(qid);
      const auto& scores = outcome.report.question_scores.at(qid);
      const auto& failed = outcome.report.question_failed.at(qid);
      for (std::size_t t = 0; t < 3; ++t) {
        CHECK(scores[t] == doctest::Approx(rec["scores"][t].get<double>()).epsilon(1e-12));
        CHECK(failed[t] == rec["failed"][t].get<bool>());
      }
    }
    CHECK(outcome.report.overall_score.mean == doctest::Approx(e["overall_score"]["mean"].get<double>()).epsilon(1e-12));
    CHECK(fs::exists(out.path() / "report.json"));
  }
}

TEST_CASE("runs are reproducible across parallelism") {
  TempDir a, b;
  auto ca = minibench_config(agent::Mode::iterative, a.path());
  auto cb = minibench_config(agent::Mode::iterative, b.path());
  cb.parallelism = 3;
  run_benchmark(ca);
  run_benchmark(cb);
  CHECK(testing::read_file(a.path() / "report.json") == testing::read_file(b.path() / "report.json"));
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (e.path().filename() != "steps.jsonl") continue;
    auto rel = e.path().lexically_relative(a.path());
    CHECK(testing::read_file(e.path()) == testing::read_file(b.path() / rel));
  }
}

TEST_CASE("missing replay is recorded, not fatal") {
  TempDir out, replays;
  auto c = minibench_config(agent::Mode::iterative, out.path());
  c.trials = 1;
  c.adapter = parse_adapter("replay:" + replays.path().string());
  auto outcome = run_benchmark(c);
  CHECK_FALSE(outcome.all_completed);
  CHECK_FALSE(outcome.problems.empty());
  CHECK(outcome.report.overall_score.mean == 0);
}
