#include "pathagent/runner/run_config.hpp"

namespace pathagent::runner {

AdapterSpec parse_adapter(const std::string& text) {
  AdapterSpec spec;
  if (text == "wire") return spec;
  const std::string prefix = "replay:";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size()) {
    spec.kind = AdapterSpec::Kind::replay;
    spec.replay_path = text.substr(prefix.size());
    return spec;
  }
  throw ConfigError("adapter must be 'wire' or 'replay:PATH', got '" + text + "'");
}

void RunConfig::validate() const {
  namespace fs = std::filesystem;
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (!(time_budget_seconds > 0)) throw ConfigError("time budget must be positive");
  if (suite.empty() || !fs::is_directory(suite)) throw ConfigError("suite is not a directory: " + suite.string());
  if (dataset_root.empty() || !fs::is_directory(dataset_root)) {
    throw ConfigError("dataset root is not a directory: " + dataset_root.string());
  }
  if (output_dir.empty()) throw ConfigError("output directory is required");
  if (adapter.kind == AdapterSpec::Kind::replay && !fs::exists(adapter.replay_path)) {
    throw ConfigError("replay fixture not found: " + adapter.replay_path.string());
  }
  if (adapter.kind == AdapterSpec::Kind::wire) {
    try {
      model.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("wire adapter: ") + e.what());
    }
  }
}

std::uint64_t question_seed(std::uint64_t seed, std::size_t trial, const std::string& question_id) {
  const std::string text = std::to_string(seed) + ":" + std::to_string(trial) + ":" + question_id;
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace pathagent::runner
