#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathagent/agent/agent.hpp"
#include "pathagent/bench/aggregate.hpp"
#include "pathagent/bench/question.hpp"
#include "pathagent/bench/scoring.hpp"
#include "pathagent/runner/run_config.hpp"
#include "pathagent/tools/registry.hpp"

namespace pathagent::runner {

/// A question with its ground truth records.
struct SuiteEntry {
  bench::QuestionSpec spec;
  nlohmann::json truth;
};

/// Questions from `suite_dir`, truth from suite_dir/ground_truth/<id>.json.
/// Throws SuiteLoadError.
std::vector<SuiteEntry> load_suite_with_truth(const std::filesystem::path& suite_dir);

struct SingleResult {
  agent::AgentRun run;
  bench::QuestionScore score;
  std::filesystem::path working_dir;
};

/// One question in a fresh output_dir/trial_<trial>/<id> directory. Writes
/// steps.jsonl, run.json and score.json there. `registry` may be null
/// unless the mode uses tools.
SingleResult run_single(const SuiteEntry& question, const RunConfig& config, std::size_t trial,
                        const tools::Registry* registry);

struct BenchmarkOutcome {
  bench::RunReport report;
  /// False if any run could not be carried out (setup or I/O failure).
  bool all_completed = true;
  std::vector<std::string> problems;
};

/// Trials run one after another; questions within a trial run on
/// `parallelism` workers. Writes output_dir/report.json.
BenchmarkOutcome run_benchmark(const RunConfig& config);

}  // namespace pathagent::runner
