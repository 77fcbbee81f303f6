#include "pathagent/model/wire_adapter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace pathagent::model {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

const nlohmann::json& step_schema() {
  static const nlohmann::json schema = {
      {"type", "object"},
      {"properties", {{"thought", {{"type", "string"}}}, {"code", {{"type", "string"}}}}},
      {"required", {"thought", "code"}},
      {"additionalProperties", false},
  };
  return schema;
}

}  // namespace

WireAdapter::WireAdapter(ModelConfig config, LogFn log)
    : config_(std::move(config)), log_(std::move(log)) {
  config_.validate();
}

void WireAdapter::log(const std::string& line) const {
  if (log_) log_(line);
}

std::string WireAdapter::request_body(const Transcript& transcript) const {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : transcript) {
    // Observations go back to the model as user turns.
    if (m.role == Role::observation) {
      messages.push_back({{"role", "user"}, {"content", "Observation:\n" + m.content}});
    } else {
      messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
  }
  nlohmann::json body = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages", messages},
      {"response_format",
       {{"type", "json_schema"},
        {"json_schema", {{"name", "agent_step"}, {"strict", true}, {"schema", step_schema()}}}}},
  };
  return body.dump();
}

StepOutput WireAdapter::complete_step(const Transcript& transcript) {
  validate_transcript(transcript);
  const Endpoint ep = split_endpoint(config_.endpoint);
  httplib::Client client(ep.origin);
  auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  Transcript convo = transcript;  // corrective turns go on a copy
  int attempts = 0;
  for (;;) {
    ++attempts;
    bool transient = false;
    std::string cause;
    auto res = client.Post(ep.path + "/chat/completions", headers, request_body(convo),
                           "application/json");
    if (!res) {
      transient = true;
      cause = "connection failed: " + httplib::to_string(res.error());
    } else if (res->status == 429 || res->status >= 500) {
      transient = true;
      cause = "HTTP " + std::to_string(res->status);
    } else if (res->status != 200) {
      last_retries_ = attempts - 1;
      throw TransportError("HTTP " + std::to_string(res->status) + " from model endpoint");
    } else {
      std::string content;
      auto body = nlohmann::json::parse(res->body, nullptr, false);
      if (!body.is_discarded()) {
        try {
          content = body.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
          content.clear();
        }
      }
      if (auto step = parse_step(content)) {
        last_retries_ = attempts - 1;
        return *step;
      }
      cause = "malformed reply";
      convo.push_back({Role::assistant, content});
      convo.push_back({Role::user, std::string(kCorrectiveMessage)});
    }
    if (attempts > config_.max_retries) {
      last_retries_ = attempts - 1;
      log("model request failed after " + std::to_string(attempts) + " attempts: " + cause);
      if (transient) throw TransportError(cause + " (after " + std::to_string(attempts) + " attempts)");
      throw MalformedOutput("reply was not a {thought, code} object after " +
                            std::to_string(attempts) + " attempts");
    }
    log("model request attempt " + std::to_string(attempts) + " failed: " + cause + "; retrying");
    if (transient && config_.backoff_seconds > 0) {
      double delay = std::min(30.0, config_.backoff_seconds * std::pow(2.0, attempts - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
  }
}

}  // namespace pathagent::model
