#include <doctest.h>

#include <condition_variable>
#include <future>
#include <mutex>

#include <httplib.h>

#include "pathagent/model/replay_adapter.hpp"
#include "pathagent/service/http_server.hpp"
#include "pathagent/service/session_manager.hpp"
#include "support.hpp"

using namespace pathagent;
using namespace pathagent::service;
using nlohmann::json;
using pathagent::testing::TempDir;
namespace fs = std::filesystem;

namespace {

/// Replay whose steps wait until the test opens the gate.
class GatedAdapter : public model::ModelAdapter {
 public:
  GatedAdapter(std::shared_future<void> gate, std::vector<model::StepOutput> steps)
      : gate_(std::move(gate)), replay_(std::move(steps)) {}
  model::StepOutput complete_step(const model::Transcript& t) override {
    gate_.wait();
    return replay_.complete_step(t);
  }

 private:
  std::shared_future<void> gate_;
  model::ReplayAdapter replay_;
};

const std::vector<std::pair<std::string, std::string>> kThreeSteps = {
    {"set up", "x = 41"},
    {"report", "from pathlib import Path\nPath('report.md').write_text('# Report\\n')"},
    {"answer", "final_answer(x + 1)"},
    {"follow up", "final_answer(x)"},
};

struct Fixture {
  TempDir root;
  std::promise<void> open;
  std::shared_future<void> gate = open.get_future().share();
  SessionManager manager{ManagerOptions{root.path() / "svc"},
                         [this](const std::string&) {
                           return std::make_unique<GatedAdapter>(gate, testing::steps(kThreeSteps));
                         },
                         nullptr};
  void release() { open.set_value(); }
};

struct Served : Fixture {
  HttpServer server{manager, ServerOptions{"127.0.0.1", 0, std::nullopt, std::chrono::milliseconds(20)}};
  int port = server.start();
  httplib::Client client{"127.0.0.1", port};
};

struct Sse {
  std::size_t id;
  std::string event;
  json data;
};

std::vector<Sse> parse_sse(const std::string& text) {
  std::vector<Sse> out;
  std::size_t pos = 0;
  while (true) {
    auto end = text.find("\n\n", pos);
    if (end == std::string::npos) break;
    std::string block = text.substr(pos, end - pos);
    pos = end + 2;
    if (block.rfind(":", 0) == 0) continue;  // comment / keepalive
    Sse e{};
    std::string data;
    std::size_t l = 0;
    while (l < block.size()) {
      auto nl = block.find('\n', l);
      std::string line = block.substr(l, nl == std::string::npos ? std::string::npos : nl - l);
      if (line.rfind("id: ", 0) == 0) e.id = std::stoul(line.substr(4));
      if (line.rfind("event: ", 0) == 0) e.event = line.substr(7);
      if (line.rfind("data: ", 0) == 0) data += line.substr(6);
      if (nl == std::string::npos) break;
      l = nl + 1;
    }
    e.data = json::parse(data);
    out.push_back(e);
  }
  return out;
}

std::vector<Sse> stream(httplib::Client& c, const std::string& path, const httplib::Headers& headers = {}) {
  auto res = c.Get(path, headers);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "text/event-stream");
  return parse_sse(res->body);
}

json post(httplib::Client& c, const std::string& path, const json& body, int expected_status) {
  auto res = c.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == expected_status);
  return json::parse(res->body);
}

}  // namespace

TEST_CASE("sessions are provisioned from the case-study preset") {
  Fixture f;
  auto a = f.manager.create_session();
  auto b = f.manager.create_session(json{{"max_steps", 20}});
  CHECK(a != b);
  auto da = f.manager.describe(a);
  auto db = f.manager.describe(b);
  CHECK(da["config"]["max_steps"] == 200);
  CHECK(da["config"]["reset_memory_after_query"] == false);
  CHECK(db["config"]["max_steps"] == 20);
  CHECK(da["status"] == "idle");
  CHECK(da["working_dir"] != db["working_dir"]);
  CHECK(fs::is_directory(da["working_dir"].get<std::string>()));
  CHECK(f.manager.list_artifacts(a).empty());
  CHECK_THROWS_AS(f.manager.create_session(json{{"max_stepz", 3}}), ServiceError);
  CHECK_THROWS_AS(f.manager.create_session(json{{"mode", "with_tools"}}), ServiceError);
  f.release();
}

TEST_CASE("busy, stop and memory continuity") {
  Fixture f;
  auto sid = f.manager.create_session();
  auto r1 = f.manager.post_query(sid, "first");
  CHECK(f.manager.describe(sid)["status"] == "running");
  try {
    f.manager.post_query(sid, "second");
    FAIL("expected SessionBusy");
  } catch (const ServiceError& e) {
    CHECK(e.kind() == ServiceErrorKind::SessionBusy);
  }
  f.release();
  f.manager.wait_idle(sid);
  auto d1 = f.manager.describe(sid);
  CHECK(d1["step_count"] == 3);
  const std::size_t len1 = d1["transcript_length"];
  CHECK(len1 == 1 + 1 + 2 * 3);

  auto r2 = f.manager.post_query(sid, "again");
  CHECK(r2 != r1);
  f.manager.wait_idle(sid);
  bool done = false;
  auto events = f.manager.events(sid, r2, 0, std::chrono::milliseconds(0), done);
  CHECK(done);
  REQUIRE(events.size() == 2);
  auto step = json::parse(events[0].data);
  CHECK(step["index"] == 4);  // continues after the first query
  auto summary = json::parse(events[1].data);
  CHECK(summary["final_answer"] == 41);
  CHECK(f.manager.describe(sid)["transcript_length"] == len1 + 1 + 2);
}

TEST_CASE("stop cancels between steps") {
  TempDir root;
  std::promise<void> open;
  auto gate = open.get_future().share();
  std::vector<std::pair<std::string, std::string>> many(10, {"loop", "x = 1"});
  SessionManager manager({root.path()},
                         [&](const std::string&) { return std::make_unique<GatedAdapter>(gate, testing::steps(many)); },
                         nullptr);
  auto sid = manager.create_session();
  auto rid = manager.post_query(sid, "spin");
  manager.stop(sid);
  open.set_value();
  manager.wait_idle(sid);
  bool done = false;
  auto events = manager.events(sid, rid, 0, std::chrono::milliseconds(0), done);
  REQUIRE_FALSE(events.empty());
  auto summary = json::parse(events.back().data);
  CHECK(events.back().event == "summary");
  CHECK(summary["cancelled"] == true);
  CHECK(summary["terminated_by"] == "step_cap");
  CHECK(summary["steps"].size() <= 1);
}

TEST_CASE("HTTP: stream, replay and resume") {
  Served s;
  auto sid = post(s.client, "/sessions", json::object(), 201)["session_id"].get<std::string>();
  auto started = post(s.client, "/sessions/" + sid + "/queries", json{{"query", "make a report"}}, 202);
  const std::string path = started["stream"];
  s.release();

  auto live = stream(s.client, path);
  REQUIRE(live.size() == 4);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(live[i].id == i + 1);
    CHECK(live[i].event == "step");
    CHECK(live[i].data["index"] == i + 1);
    for (const char* k : {"thought", "code", "observation", "operations_used", "is_final", "duration"}) {
      CHECK(live[i].data.contains(k));
    }
  }
  CHECK(live[3].event == "summary");
  CHECK(live[3].data["terminated_by"] == "final_answer");
  CHECK(live[3].data["final_answer"] == 42);
  CHECK(live[3].data["steps"].size() == 3);

  auto late = stream(s.client, path);
  REQUIRE(late.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(late[i].data == live[i].data);

  auto resumed = stream(s.client, path, {{"Last-Event-ID", "2"}});
  REQUIRE(resumed.size() == 2);
  CHECK(resumed[0].id == 3);
  CHECK(stream(s.client, path + "?after=3").size() == 1);
  auto bad = s.client.Get(path, {{"Last-Event-ID", "two"}});
  CHECK(bad->status == 400);
}

TEST_CASE("HTTP: artifacts") {
  Served s;
  s.release();
  auto sid = post(s.client, "/sessions", json::object(), 201)["session_id"].get<std::string>();
  post(s.client, "/sessions/" + sid + "/queries", json{{"query", "q"}}, 202);
  s.manager.wait_idle(sid);

  auto listing = s.client.Get("/sessions/" + sid + "/artifacts");
  REQUIRE(listing->status == 200);
  auto items = json::parse(listing->body)["artifacts"];
  std::set<std::string> names;
  for (const auto& a : items) names.insert(a["path"].get<std::string>());
  CHECK(names.count("report.md"));
  CHECK(names.count("steps.jsonl"));

  auto report = s.client.Get("/sessions/" + sid + "/artifacts/report.md");
  REQUIRE(report->status == 200);
  CHECK(report->body == "# Report\n");
  CHECK(report->get_header_value("Content-Type").rfind("text/plain", 0) == 0);

  const auto wd = fs::path(s.manager.describe(sid)["working_dir"].get<std::string>());
  testing::write_file(wd.parent_path() / "secret.txt", "no");
  fs::create_symlink(wd.parent_path() / "secret.txt", wd / "link.txt");
  for (const std::string escape : {"../secret.txt", "..%2Fsecret.txt", "sub/../../secret.txt", "link.txt"}) {
    INFO(escape);
    auto res = s.client.Get("/sessions/" + sid + "/artifacts/" + escape);
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"] == "PathEscape");
  }
  CHECK_THROWS_AS(s.manager.read_artifact(sid, "/etc/passwd"), ServiceError);
  CHECK(s.client.Get("/sessions/" + sid + "/artifacts/missing.txt")->status == 404);

  auto again = json::parse(s.client.Get("/sessions/" + sid + "/artifacts")->body)["artifacts"];
  fs::remove(wd / "link.txt");
  again = json::parse(s.client.Get("/sessions/" + sid + "/artifacts")->body)["artifacts"];
  CHECK(again == items);  // reads left the directory unchanged
}

TEST_CASE("HTTP: errors and lifecycle") {
  Served s;
  s.release();
  CHECK(s.client.Get("/sessions/abc123")->status == 404);
  CHECK(json::parse(s.client.Get("/sessions/abc123")->body)["error"] == "UnknownSession");
  auto sid = post(s.client, "/sessions", json{{"config", {{"max_steps", 5}}}}, 201)["session_id"].get<std::string>();
  CHECK(s.client.Get("/sessions/" + sid + "/runs/run9/stream")->status == 404);
  post(s.client, "/sessions/" + sid + "/queries", json::object(), 400);
  post(s.client, "/sessions", json{{"config", {{"bogus", 1}}}}, 400);
  auto raw = s.client.Post("/sessions", "not json", "application/json");
  CHECK(raw->status == 400);

  auto wd = fs::path(s.manager.describe(sid)["working_dir"].get<std::string>());
  CHECK(s.client.Delete("/sessions/" + sid)->status == 200);
  CHECK_FALSE(fs::exists(wd));
  CHECK(fs::is_directory(wd.parent_path().parent_path() / "archive" / sid));
  CHECK(json::parse(s.client.Get("/sessions/" + sid)->body)["status"] == "closed");
  auto closed = post(s.client, "/sessions/" + sid + "/queries", json{{"query", "q"}}, 409);
  CHECK(closed["error"] == "SessionClosed");

  auto spec = s.client.Get("/openapi.json");
  REQUIRE(spec->status == 200);
  auto doc = json::parse(spec->body);
  CHECK(doc["paths"].contains("/sessions/{session_id}/runs/{run_id}/stream"));
  CHECK(doc["components"]["schemas"]["AgentStep"]["required"].size() == 6);
}

TEST_CASE("HTTP: busy session and disconnected subscriber") {
  Served s;
  auto sid = post(s.client, "/sessions", json::object(), 201)["session_id"].get<std::string>();
  auto started = post(s.client, "/sessions/" + sid + "/queries", json{{"query", "q"}}, 202);
  auto busy = post(s.client, "/sessions/" + sid + "/queries", json{{"query", "q2"}}, 409);
  CHECK(busy["error"] == "SessionBusy");

  // a subscriber that hangs up after the first chunk
  httplib::Client quitter("127.0.0.1", s.port);
  std::thread t([&] {
    quitter.Get(started["stream"].get<std::string>(), [](const char*, std::size_t) { return false; });
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  s.release();
  t.join();
  s.manager.wait_idle(sid);
  CHECK(s.manager.describe(sid)["step_count"] == 3);
}

TEST_CASE("HTTP: bearer token") {
  Fixture f;
  f.release();
  HttpServer server(f.manager, ServerOptions{"127.0.0.1", 0, std::string("t0k"), std::chrono::milliseconds(20)});
  int port = server.start();
  httplib::Client c("127.0.0.1", port);
  CHECK(c.Post("/sessions", "{}", "application/json")->status == 401);
  c.set_bearer_token_auth("t0k");
  CHECK(c.Post("/sessions", "{}", "application/json")->status == 201);
}

TEST_CASE("idle sessions expire") {
  TempDir root;
  ManagerOptions opts{root.path()};
  opts.idle_ttl = std::chrono::seconds(0);
  SessionManager m(opts, [](const std::string&) { return std::make_unique<model::ReplayAdapter>(std::vector<model::StepOutput>{}); },
                   nullptr);
  auto sid = m.create_session();
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(m.expire_idle() == 1);
  CHECK(m.describe(sid)["status"] == "closed");
  CHECK(format_sse({7, "step", "{}"}) == "id: 7\nevent: step\ndata: {}\n\n");
}
