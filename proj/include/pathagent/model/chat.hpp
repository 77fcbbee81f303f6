#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pathagent::model {

enum class Role { system, user, assistant, observation };

const char* to_string(Role r);
Role role_from_string(std::string_view s);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

using Transcript = std::vector<ChatMessage>;

/// Throws std::invalid_argument unless the transcript is non-empty and has
/// exactly one system message, at index 0.
void validate_transcript(const Transcript& t);

struct StepOutput {
  std::string thought;
  std::string code;
  std::string raw;
};

/// Parses a model reply of the form {"thought": ..., "code": ...}. A fenced
/// ```json block around the object is tolerated. Returns nullopt when the
/// reply is not such an object.
std::optional<StepOutput> parse_step(std::string_view reply);

/// The message sent back after an unparseable reply.
inline constexpr std::string_view kCorrectiveMessage =
    "reply must be a single object with fields thought and code";

struct ModelConfig {
  std::string endpoint;  // base URL, e.g. https://host/v1
  std::string model;
  double temperature = 0.0;
  int max_retries = 20;
  std::string api_key;  // never logged
  double timeout_seconds = 120;
  /// Delay before retry i (0-based) is backoff_seconds * 2^i, capped at 30 s.
  double backoff_seconds = 1.0;

  /// Reads PATHAGENT_ENDPOINT, PATHAGENT_MODEL and PATHAGENT_API_KEY.
  static ModelConfig from_environment();
  /// Throws std::invalid_argument.
  void validate() const;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedOutput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LogFn = std::function<void(std::string_view)>;

class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;
  /// One (thought, code) step for the transcript. Throws TransportError or
  /// MalformedOutput once retries are exhausted.
  virtual StepOutput complete_step(const Transcript& transcript) = 0;
  /// Attempts minus one for the most recent complete_step.
  virtual int last_retry_count() const { return 0; }
};

}  // namespace pathagent::model
