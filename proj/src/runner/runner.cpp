#include "pathagent/runner/runner.hpp"

#include <atomic>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include "pathagent/model/replay_adapter.hpp"
#include "pathagent/model/wire_adapter.hpp"
#include "pathagent/tools/catalog.hpp"

namespace pathagent::runner {

namespace fs = std::filesystem;

std::vector<SuiteEntry> load_suite_with_truth(const fs::path& suite_dir) {
  std::vector<bench::QuestionSpec> specs;
  try {
    specs = bench::load_suite(suite_dir);
  } catch (const std::exception& e) {
    throw SuiteLoadError(e.what());
  }
  if (specs.empty()) throw SuiteLoadError("suite has no questions: " + suite_dir.string());
  std::vector<SuiteEntry> out;
  for (auto& spec : specs) {
    if (spec.category.empty()) throw SuiteLoadError("question " + spec.id + " has no category");
    fs::path truth_path = suite_dir / "ground_truth" / (spec.id + ".json");
    std::ifstream in(truth_path);
    if (!in) throw SuiteLoadError("missing ground truth: " + truth_path.string());
    auto truth = nlohmann::json::parse(in, nullptr, false);
    if (truth.is_discarded() || !truth.is_array()) {
      throw SuiteLoadError("ground truth must be a JSON array: " + truth_path.string());
    }
    out.push_back({std::move(spec), std::move(truth)});
  }
  return out;
}

namespace {

std::unique_ptr<model::ModelAdapter> make_adapter(const RunConfig& config, const bench::QuestionSpec& q,
                                                  const fs::path& working_dir) {
  if (config.adapter.kind == AdapterSpec::Kind::wire) {
    return std::make_unique<model::WireAdapter>(config.model);
  }
  fs::path fixture = config.adapter.replay_path;
  if (fs::is_directory(fixture)) fixture /= q.id + ".json";
  std::map<std::string, std::string> subs;
  for (auto& [k, v] : bench::placeholder_values(q, config.dataset_root, working_dir)) subs[k] = v;
  subs["dataset_root"] = fs::absolute(config.dataset_root).lexically_normal().string();
  return std::make_unique<model::ReplayAdapter>(model::ReplayAdapter::from_file(fixture, subs));
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

SingleResult run_single(const SuiteEntry& question, const RunConfig& config, std::size_t trial,
                        const tools::Registry* registry) {
  const auto& q = question.spec;
  SingleResult result;
  result.working_dir =
      fs::absolute(config.output_dir / ("trial_" + std::to_string(trial)) / q.id).lexically_normal();
  fs::remove_all(result.working_dir);
  fs::create_directories(result.working_dir);

  const fs::path dataset = fs::absolute(config.dataset_root).lexically_normal();
  agent::AgentConfig ac;
  ac.mode = config.mode;
  ac.max_steps = config.max_steps;
  ac.limits.read_only_roots = {dataset};
  ac.limits.random_seed = question_seed(config.seed, trial, q.id);
  ac.time_budget_seconds = config.time_budget_seconds;
  ac.log_aliases = {{dataset.string(), "{dataset}"}};

  auto adapter = make_adapter(config, q, result.working_dir);
  agent::Agent agent(ac, *adapter, registry);
  const std::string prompt = bench::materialize_prompt(q, dataset, result.working_dir);
  result.run = agent.run_query(prompt, result.working_dir);
  result.score = bench::evaluate_answer(result.working_dir / "answer.json", question.truth, q);

  nlohmann::ordered_json score;
  score["question_id"] = q.id;
  score["category"] = q.category;
  score["score"] = result.score.score;
  score["produced_valid_file"] = result.score.produced_valid_file;
  score["failed"] = result.score.failed;
  score["terminated_by"] = agent::to_string(result.run.terminated_by);
  score["time_budget_exceeded"] = result.run.time_budget_exceeded;
  score["field_scores"] = nlohmann::ordered_json::array();
  for (const auto& f : result.score.field_scores) {
    score["field_scores"].push_back({{"record", f.record}, {"field", f.field}, {"score", f.score}});
  }
  write_json(result.working_dir / "score.json", score);
  return result;
}

BenchmarkOutcome run_benchmark(const RunConfig& config) {
  config.validate();
  const auto suite = load_suite_with_truth(config.suite);

  std::unique_ptr<tools::Registry> registry;
  if (config.mode == agent::Mode::with_tools) {
    registry = std::make_unique<tools::Registry>(tools::default_registry(config.dataset_root));
  }

  BenchmarkOutcome outcome;
  std::vector<bench::TrialResults> trials;
  for (std::size_t trial = 1; trial <= config.trials; ++trial) {
    bench::TrialResults results(suite.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&] {
      for (std::size_t i = next++; i < suite.size(); i = next++) {
        const auto& entry = suite[i];
        results[i] = {entry.spec.id, entry.spec.category, 0.0, true};
        try {
          auto r = run_single(entry, config, trial, registry.get());
          results[i].score = r.score.score;
          results[i].failed = r.score.failed;
        } catch (const std::exception& e) {
          std::lock_guard lock(mu);
          outcome.all_completed = false;
          outcome.problems.push_back("trial " + std::to_string(trial) + " question " + entry.spec.id +
                                     ": " + e.what());
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min(config.parallelism, suite.size());
    for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    trials.push_back(std::move(results));
  }

  outcome.report = bench::aggregate(trials);
  auto j = bench::report_to_json(outcome.report);
  nlohmann::ordered_json doc;
  doc["suite"] = fs::absolute(config.suite).lexically_normal().filename().string();
  doc["mode"] = agent::to_string(config.mode);
  doc["adapter"] = config.adapter.kind == AdapterSpec::Kind::wire ? "wire" : "replay";
  doc["seed"] = config.seed;
  doc["max_steps"] = config.max_steps;
  for (auto& [k, v] : j.items()) doc[k] = v;
  fs::create_directories(config.output_dir);
  write_json(config.output_dir / "report.json", doc);
  return outcome;
}

}  // namespace pathagent::runner
