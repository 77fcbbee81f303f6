#include "pathagent/model/chat.hpp"

#include <cctype>
#include <cstdlib>

#include <json.hpp>

namespace pathagent::model {

const char* to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::observation: return "observation";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  if (s == "observation") return Role::observation;
  throw std::invalid_argument("unknown role: " + std::string(s));
}

void validate_transcript(const Transcript& t) {
  if (t.empty()) throw std::invalid_argument("transcript is empty");
  if (t.front().role != Role::system) {
    throw std::invalid_argument("transcript must start with a system message");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i].role == Role::system) {
      throw std::invalid_argument("system message at index " + std::to_string(i));
    }
  }
}

std::optional<StepOutput> parse_step(std::string_view reply) {
  std::string_view body = reply;
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  body = trim(body);
  if (body.substr(0, 3) == "```") {
    auto nl = body.find('\n');
    auto close = body.rfind("```");
    if (nl == std::string_view::npos || close <= nl) return std::nullopt;
    body = trim(body.substr(nl + 1, close - nl - 1));
  }
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto thought = j.find("thought");
  auto code = j.find("code");
  if (thought == j.end() || code == j.end() || !thought->is_string() || !code->is_string()) {
    return std::nullopt;
  }
  return StepOutput{thought->get<std::string>(), code->get<std::string>(), std::string(reply)};
}

ModelConfig ModelConfig::from_environment() {
  ModelConfig c;
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  c.endpoint = env("PATHAGENT_ENDPOINT");
  c.model = env("PATHAGENT_MODEL");
  c.api_key = env("PATHAGENT_API_KEY");
  return c;
}

void ModelConfig::validate() const {
  if (endpoint.empty()) throw std::invalid_argument("model endpoint is not set");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (temperature < 0) throw std::invalid_argument("temperature must be >= 0");
  if (timeout_seconds <= 0) throw std::invalid_argument("timeout must be positive");
  if (backoff_seconds < 0) throw std::invalid_argument("backoff must be >= 0");
}

}  // namespace pathagent::model
