#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "pathagent/service/session_manager.hpp"

namespace httplib {
class Server;
}

namespace pathagent::service {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::string> bearer_token;
  std::chrono::milliseconds stream_poll{250};
};

/// HTTP front end over a SessionManager:
///   POST   /sessions                          -> 201 {session_id}
///   GET    /sessions/{id}                     -> session description
///   POST   /sessions/{id}/queries {query}     -> 202 {run_id, stream}
///   GET    /sessions/{id}/runs/{rid}/stream   -> text/event-stream
///   GET    /sessions/{id}/artifacts           -> {artifacts: [...]}
///   GET    /sessions/{id}/artifacts/{path}    -> file bytes
///   POST   /sessions/{id}/stop                -> 202
///   DELETE /sessions/{id}                     -> 200
///   GET    /openapi.json                      -> the contract below
class HttpServer {
 public:
  HttpServer(SessionManager& manager, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket and returns the port.
  int bind();
  /// Serves on the calling thread until stop().
  void listen();
  /// bind() + listen() on a background thread.
  int start();
  void stop();
  int port() const { return port_; }

 private:
  void install_routes();

  SessionManager& manager_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

int http_status(ServiceErrorKind kind);

/// OpenAPI 3 description of the routes and payloads.
nlohmann::json openapi_document();

/// Wire form of one event: "id: N\nevent: E\ndata: D\n\n".
std::string format_sse(const StreamEvent& e);

}  // namespace pathagent::service
