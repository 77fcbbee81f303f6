#include <doctest.h>

#include <atomic>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "pathagent/model/replay_adapter.hpp"
#include "pathagent/model/wire_adapter.hpp"
#include "support.hpp"

using namespace pathagent::model;

namespace {

std::string completion(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

/// Chat endpoint that answers with a scripted sequence of (status, content).
class StubServer {
 public:
  explicit StubServer(std::vector<std::pair<int, std::string>> replies) : replies_(std::move(replies)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      requests_.push_back(req.body);
      auth_.push_back(req.get_header_value("Authorization"));
      auto [status, content] = replies_[std::min(requests_.size() - 1, replies_.size() - 1)];
      res.status = status;
      res.set_content(status == 200 ? completion(content) : R"({"error":"busy"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::vector<std::string> requests() {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::vector<std::string> auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }

 private:
  httplib::Server server_;
  std::vector<std::pair<int, std::string>> replies_;
  std::mutex mu_;
  std::vector<std::string> requests_;
  std::vector<std::string> auth_;
  int port_ = 0;
  std::thread thread_;
};

const std::string kGood = R"j({"thought": "look", "code": "print(1)"})j";

Transcript base_transcript() {
  return {{Role::system, "sys"}, {Role::user, "question"}};
}

ModelConfig config_for(const StubServer& s, int retries) {
  ModelConfig c;
  c.endpoint = s.endpoint();
  c.model = "test-model";
  c.max_retries = retries;
  c.backoff_seconds = 0;
  c.api_key = "sk-secret-value";
  c.timeout_seconds = 5;
  return c;
}

}  // namespace

TEST_CASE("parse_step") {
  auto s = parse_step(kGood);
  REQUIRE(s);
  CHECK(s->thought == "look");
  CHECK(s->code == "print(1)");
  CHECK(parse_step("```json\n" + kGood + "\n```"));
  CHECK_FALSE(parse_step(R"({"thought": "no code"})"));
  CHECK_FALSE(parse_step(R"({"thought": 1, "code": "x"})"));
  CHECK_FALSE(parse_step("[1, 2]"));
  CHECK_FALSE(parse_step("not json"));
}

TEST_CASE("transcript validation") {
  CHECK_THROWS_AS(validate_transcript({}), std::invalid_argument);
  CHECK_THROWS_AS(validate_transcript({{Role::user, "q"}}), std::invalid_argument);
  CHECK_THROWS_AS(validate_transcript({{Role::system, "a"}, {Role::system, "b"}}), std::invalid_argument);
  CHECK_NOTHROW(validate_transcript(base_transcript()));
  CHECK(role_from_string("observation") == Role::observation);
}

TEST_CASE("model config") {
  ModelConfig c;
  CHECK(c.temperature == 0.0);
  CHECK(c.max_retries == 20);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.endpoint = "http://x";
  CHECK_NOTHROW(c.validate());
  c.max_retries = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("replay adapter") {
  auto recorded = pathagent::testing::steps({{"a", "x = 1"}, {"b", "print({{working_dir}})"}, {"c", "final_answer(1)"}});
  ReplayAdapter first(recorded, {{"working_dir", "'/w'"}});
  ReplayAdapter second(recorded, {{"working_dir", "'/w'"}});
  for (int i = 0; i < 3; ++i) {
    auto a = first.complete_step(base_transcript());
    auto b = second.complete_step(base_transcript());
    CHECK(a.code == b.code);
    CHECK(a.thought == recorded[i].thought);
  }
  CHECK(first.served() == 3);
  CHECK_THROWS_AS(first.complete_step(base_transcript()), TransportError);
  ReplayAdapter again(recorded, {{"working_dir", "'/w'"}});
  again.complete_step(base_transcript());
  CHECK(again.complete_step(base_transcript()).code == "print('/w')");
  CHECK(fill_placeholders("{{a}}+{{a}}={{b}}", {{"a", "1"}, {"b", "2"}}) == "1+1=2");
}

TEST_CASE("wire adapter retries a 429") {
  StubServer server({{429, ""}, {200, kGood}});
  std::vector<std::string> logs;
  WireAdapter adapter(config_for(server, 20), [&](std::string_view l) { logs.emplace_back(l); });
  const auto transcript = base_transcript();
  const auto before = transcript.size();
  auto step = adapter.complete_step(transcript);
  CHECK(step.code == "print(1)");
  CHECK(adapter.last_retry_count() == 1);
  CHECK(transcript.size() == before);
  CHECK(server.requests().size() == 2);
  CHECK(logs.size() == 1);
  for (const auto& a : server.auth()) CHECK(a == "Bearer sk-secret-value");
  for (const auto& l : logs) CHECK(l.find("sk-secret") == std::string::npos);

  auto body = nlohmann::json::parse(server.requests().front());
  CHECK(body["model"] == "test-model");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["messages"].size() == 2);
  CHECK(body["response_format"]["type"] == "json_schema");
}

TEST_CASE("wire adapter corrects a malformed reply") {
  StubServer server({{200, R"({"thought": "missing"})"}, {200, kGood}});
  WireAdapter adapter(config_for(server, 3));
  Transcript t = base_transcript();
  t.push_back({Role::assistant, kGood});
  t.push_back({Role::observation, "1"});
  auto step = adapter.complete_step(t);
  CHECK(step.thought == "look");
  CHECK(adapter.last_retry_count() == 1);
  auto second = nlohmann::json::parse(server.requests()[1]);
  const auto& msgs = second["messages"];
  REQUIRE(msgs.size() == 6);
  CHECK(msgs[3]["content"] == "Observation:\n1");
  CHECK(msgs[4]["role"] == "assistant");
  CHECK(msgs[5]["content"] == std::string(kCorrectiveMessage));
}

TEST_CASE("wire adapter gives up") {
  {
    StubServer server({{200, R"({"thought": "no code"})"}});
    WireAdapter adapter(config_for(server, 0));
    CHECK_THROWS_AS(adapter.complete_step(base_transcript()), MalformedOutput);
    CHECK(server.requests().size() == 1);
  }
  {
    StubServer server({{503, ""}});
    std::vector<std::string> logs;
    WireAdapter adapter(config_for(server, 2), [&](std::string_view l) { logs.emplace_back(l); });
    CHECK_THROWS_AS(adapter.complete_step(base_transcript()), TransportError);
    CHECK(server.requests().size() == 3);
    CHECK(adapter.last_retry_count() == 2);
    for (const auto& l : logs) CHECK(l.find("sk-secret") == std::string::npos);
  }
  {
    StubServer server({{401, ""}});
    WireAdapter adapter(config_for(server, 5));
    CHECK_THROWS_AS(adapter.complete_step(base_transcript()), TransportError);
    CHECK(server.requests().size() == 1);  // not retried
  }
  {
    ModelConfig c;
    c.endpoint = "http://127.0.0.1:1/v1";
    c.max_retries = 1;
    c.backoff_seconds = 0;
    c.timeout_seconds = 1;
    WireAdapter adapter(c);
    CHECK_THROWS_AS(adapter.complete_step(base_transcript()), TransportError);
  }
}
