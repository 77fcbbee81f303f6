#include "pathagent/service/http_server.hpp"

#include <httplib.h>

#include <json.hpp>

namespace pathagent::service {

using nlohmann::json;

int http_status(ServiceErrorKind kind) {
  switch (kind) {
    case ServiceErrorKind::UnknownSession:
    case ServiceErrorKind::UnknownRun:
    case ServiceErrorKind::NotFound: return 404;
    case ServiceErrorKind::SessionBusy:
    case ServiceErrorKind::SessionClosed: return 409;
    case ServiceErrorKind::PathEscape:
    case ServiceErrorKind::BadRequest: return 400;
  }
  return 500;
}

std::string format_sse(const StreamEvent& e) {
  std::string out = "id: " + std::to_string(e.id) + "\nevent: " + e.event + "\n";
  // data must not contain raw newlines; split just in case
  std::size_t start = 0;
  while (true) {
    auto nl = e.data.find('\n', start);
    out += "data: " + e.data.substr(start, nl == std::string::npos ? std::string::npos : nl - start) + "\n";
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  return out + "\n";
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send_json(res, status, json{{"error", kind}, {"message", message}});
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, http_status(e.kind()), to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "BadRequest", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw ServiceError(ServiceErrorKind::BadRequest, "request body must be a JSON object");
  }
  return body;
}

std::string content_type_for(const std::string& path) {
  auto ends_with = [&](const char* ext) {
    std::string e(ext);
    return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
  };
  if (ends_with(".json")) return "application/json";
  if (ends_with(".jsonl")) return "application/x-ndjson";
  if (ends_with(".csv")) return "text/csv";
  if (ends_with(".png")) return "image/png";
  if (ends_with(".txt") || ends_with(".md") || ends_with(".py")) return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

json ref(const char* name) { return json{{"$ref", std::string("#/components/schemas/") + name}}; }

json json_response(const char* description, json schema) {
  return json{{"description", description}, {"content", {{"application/json", {{"schema", std::move(schema)}}}}}};
}

json error_response(const char* description) { return json_response(description, ref("Error")); }

json id_param(const char* name) {
  return json{{"name", name}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
}

}  // namespace

json openapi_document() {
  json str = {{"type", "string"}};
  json integer = {{"type", "integer"}};
  json number = {{"type", "number"}};
  json boolean = {{"type", "boolean"}};
  json step = {{"type", "object"},
               {"required", {"index", "thought", "code", "observation", "operations_used", "is_final"}},
               {"properties",
                {{"index", integer}, {"thought", str}, {"code", str}, {"observation", str},
                 {"operations_used", integer}, {"is_final", boolean}, {"duration", number}}}};
  json run = {{"type", "object"},
              {"properties",
               {{"session_id", str}, {"run_id", str}, {"query", str},
                {"steps", {{"type", "array"}, {"items", ref("AgentStep")}}},
                {"final_answer", json::object()}, {"working_dir", str},
                {"terminated_by", {{"type", "string"}, {"enum", {"final_answer", "step_cap", "fatal_error"}}}},
                {"total_duration", number}, {"fatal_error", str}, {"cancelled", boolean},
                {"time_budget_exceeded", boolean}}}};
  json config = {{"type", "object"},
                 {"additionalProperties", false},
                 {"properties",
                  {{"max_steps", integer},
                   {"mode", {{"type", "string"}, {"enum", {"llm_only", "single_shot", "iterative", "with_tools"}}}},
                   {"reset_memory_after_query", boolean},
                   {"tool_categories", {{"type", "array"}, {"items", str}}},
                   {"special_instructions", str}, {"web_search_stub", boolean},
                   {"observation_cap", integer}, {"time_budget_seconds", number}}}};
  json artifact = {{"type", "object"},
                   {"properties", {{"path", str}, {"size", integer}, {"modified", integer}}}};
  json error = {{"type", "object"}, {"properties", {{"error", str}, {"message", str}}}};

  json paths;
  paths["/sessions"]["post"] = {
      {"summary", "Create a session"},
      {"requestBody", {{"content", {{"application/json", {{"schema", {{"type", "object"}, {"properties", {{"config", ref("SessionConfig")}}}}}}}}}}},
      {"responses", {{"201", json_response("Created", {{"type", "object"}, {"properties", {{"session_id", str}}}})},
                     {"400", error_response("Bad configuration")}}}};
  paths["/sessions/{session_id}"]["parameters"] = {id_param("session_id")};
  paths["/sessions/{session_id}"]["get"] = {
      {"summary", "Describe a session"},
      {"responses", {{"200", json_response("Session", {{"type", "object"}})}, {"404", error_response("Unknown session")}}}};
  paths["/sessions/{session_id}"]["delete"] = {
      {"summary", "Close a session and archive its working directory"},
      {"responses", {{"200", json_response("Closed", {{"type", "object"}})}, {"404", error_response("Unknown session")}}}};
  paths["/sessions/{session_id}/queries"]["parameters"] = {id_param("session_id")};
  paths["/sessions/{session_id}/queries"]["post"] = {
      {"summary", "Start a query on the session's memory"},
      {"requestBody", {{"required", true}, {"content", {{"application/json", {{"schema", {{"type", "object"}, {"required", {"query"}}, {"properties", {{"query", str}}}}}}}}}}},
      {"responses", {{"202", json_response("Started", {{"type", "object"}, {"properties", {{"run_id", str}, {"stream", str}}}})},
                     {"404", error_response("Unknown session")},
                     {"409", error_response("Session busy or closed")}}}};
  paths["/sessions/{session_id}/stop"]["parameters"] = {id_param("session_id")};
  paths["/sessions/{session_id}/stop"]["post"] = {
      {"summary", "Cancel the running query before its next step"},
      {"responses", {{"202", json_response("Requested", {{"type", "object"}})}, {"404", error_response("Unknown session")}}}};
  paths["/sessions/{session_id}/runs/{run_id}/stream"]["parameters"] = {id_param("session_id"), id_param("run_id")};
  paths["/sessions/{session_id}/runs/{run_id}/stream"]["get"] = {
      {"summary", "Server-sent events: one 'step' event per AgentStep, then one 'summary' event with the AgentRun"},
      {"parameters", {{{"name", "Last-Event-ID"}, {"in", "header"}, {"required", false}, {"schema", integer}},
                      {{"name", "after"}, {"in", "query"}, {"required", false}, {"schema", integer}}}},
      {"responses", {{"200", {{"description", "Event stream"}, {"content", {{"text/event-stream", {{"schema", str}}}}}}},
                     {"404", error_response("Unknown session or run")}}}};
  paths["/sessions/{session_id}/artifacts"]["parameters"] = {id_param("session_id")};
  paths["/sessions/{session_id}/artifacts"]["get"] = {
      {"summary", "Files in the working directory"},
      {"responses", {{"200", json_response("Listing", {{"type", "object"}, {"properties", {{"artifacts", {{"type", "array"}, {"items", ref("Artifact")}}}}}})},
                     {"404", error_response("Unknown session")}}}};
  paths["/sessions/{session_id}/artifacts/{path}"]["parameters"] = {id_param("session_id"), id_param("path")};
  paths["/sessions/{session_id}/artifacts/{path}"]["get"] = {
      {"summary", "File contents"},
      {"responses", {{"200", {{"description", "File bytes"}}},
                     {"400", error_response("Path outside the working directory")},
                     {"404", error_response("Unknown session or file")}}}};

  return json{{"openapi", "3.0.3"},
              {"info", {{"title", "pathagent session service"}, {"version", "1"}}},
              {"paths", paths},
              {"components",
               {{"schemas", {{"AgentStep", step}, {"AgentRun", run}, {"SessionConfig", config},
                             {"Artifact", artifact}, {"Error", error}}},
                {"securitySchemes", {{"bearer", {{"type", "http"}, {"scheme", "bearer"}}}}}}}};
}

HttpServer::HttpServer(SessionManager& manager, ServerOptions options)
    : manager_(manager), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  auto& srv = *server_;
  if (options_.bearer_token) {
    std::string expected = "Bearer " + *options_.bearer_token;
    srv.set_pre_routing_handler([expected](const httplib::Request& req, httplib::Response& res) {
      if (req.get_header_value("Authorization") != expected) {
        send_error(res, 401, "Unauthorized", "missing or wrong bearer token");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
  }

  srv.Get("/openapi.json", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(openapi_document().dump(2), "application/json");
  });

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = parse_body(req);
    json overrides = body.contains("config") ? body["config"] : json::object();
    std::string id = manager_.create_session(overrides);
    send_json(res, 201, json{{"session_id", id}});
  }));

  srv.Get(R"(/sessions/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(manager_.describe(req.matches[1]).dump(), "application/json");
  }));

  srv.Delete(R"(/sessions/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    manager_.close(req.matches[1]);
    send_json(res, 200, json{{"session_id", std::string(req.matches[1])}, {"status", "closed"}});
  }));

  srv.Post(R"(/sessions/([0-9a-f]+)/queries)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = parse_body(req);
    if (!body.contains("query") || !body["query"].is_string() || body["query"].get<std::string>().empty()) {
      throw ServiceError(ServiceErrorKind::BadRequest, "body needs a non-empty string field 'query'");
    }
    std::string sid = req.matches[1];
    std::string rid = manager_.post_query(sid, body["query"].get<std::string>());
    send_json(res, 202, json{{"run_id", rid}, {"stream", "/sessions/" + sid + "/runs/" + rid + "/stream"}});
  }));

  srv.Post(R"(/sessions/([0-9a-f]+)/stop)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    manager_.stop(req.matches[1]);
    send_json(res, 202, json{{"stop_requested", true}});
  }));

  srv.Get(R"(/sessions/([0-9a-f]+)/artifacts)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json list = json::array();
    for (const auto& a : manager_.list_artifacts(req.matches[1])) {
      list.push_back(json{{"path", a.path}, {"size", a.size}, {"modified", a.modified}});
    }
    send_json(res, 200, json{{"artifacts", list}});
  }));

  srv.Get(R"(/sessions/([0-9a-f]+)/artifacts/(.+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::string rel = req.matches[2];
            res.set_content(manager_.read_artifact(req.matches[1], rel), content_type_for(rel));
          }));

  srv.Get(R"(/sessions/([0-9a-f]+)/runs/([A-Za-z0-9]+)/stream)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::string sid = req.matches[1];
            std::string rid = req.matches[2];
            std::size_t after = 0;
            std::string resume = req.get_header_value("Last-Event-ID");
            if (resume.empty() && req.has_param("after")) resume = req.get_param_value("after");
            if (!resume.empty()) {
              try {
                after = std::stoul(resume);
              } catch (const std::exception&) {
                throw ServiceError(ServiceErrorKind::BadRequest, "Last-Event-ID must be an integer");
              }
            }
            bool done = false;
            manager_.events(sid, rid, after, std::chrono::milliseconds(0), done);  // 404s early
            res.set_header("Cache-Control", "no-cache");
            auto poll = options_.stream_poll;
            res.set_chunked_content_provider(
                "text/event-stream",
                [this, sid, rid, after, poll](std::size_t, httplib::DataSink& sink) mutable {
                  bool finished = false;
                  std::vector<StreamEvent> batch;
                  try {
                    batch = manager_.events(sid, rid, after, poll, finished);
                  } catch (const ServiceError&) {
                    sink.done();
                    return true;
                  }
                  for (const auto& e : batch) {
                    std::string chunk = format_sse(e);
                    if (!sink.write(chunk.data(), chunk.size())) return false;
                    after = e.id;
                  }
                  if (finished) {
                    sink.done();
                  } else if (batch.empty()) {
                    static const std::string ping = ": keepalive\n\n";
                    if (!sink.write(ping.data(), ping.size())) return false;
                  }
                  return true;
                });
          }));
}

int HttpServer::bind() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  return port_;
}

void HttpServer::listen() { server_->listen_after_bind(); }

int HttpServer::start() {
  int p = bind();
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return p;
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace pathagent::service
