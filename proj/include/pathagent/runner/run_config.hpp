#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "pathagent/agent/agent.hpp"
#include "pathagent/model/chat.hpp"

namespace pathagent::runner {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SuiteLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdapterSpec {
  enum class Kind { wire, replay };
  Kind kind = Kind::wire;
  /// Replay fixture: a file, or a directory holding <question id>.json.
  std::filesystem::path replay_path;
};

/// "wire" or "replay:PATH". Throws ConfigError.
AdapterSpec parse_adapter(const std::string& text);

struct RunConfig {
  std::filesystem::path suite;
  std::filesystem::path dataset_root;
  agent::Mode mode = agent::Mode::with_tools;
  AdapterSpec adapter;
  std::size_t trials = 3;
  std::size_t parallelism = 1;
  std::filesystem::path output_dir;
  std::uint64_t seed = 42;
  double time_budget_seconds = 30 * 60;
  std::size_t max_steps = 20;
  model::ModelConfig model;  // wire adapter only

  /// Throws ConfigError.
  void validate() const;
};

/// Interpreter seed for one (trial, question): the low 64 bits of FNV-1a
/// over the text "<seed>:<trial>:<question id>".
std::uint64_t question_seed(std::uint64_t seed, std::size_t trial, const std::string& question_id);

}  // namespace pathagent::runner
