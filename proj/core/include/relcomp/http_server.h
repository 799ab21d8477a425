#ifndef RELCOMP_HTTP_SERVER_H_
#define RELCOMP_HTTP_SERVER_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "relcomp/session_service.h"

namespace relcomp {

// Routes the /v1 API onto a SessionService:
//   GET /v1/status, GET /v1/query, POST /v1/answer, GET /v1/metric,
//   GET /v1/history
// and optionally serves a static UI bundle from `static_dir` at "/".
class HttpServer {
 public:
  HttpServer(SessionService& service,
             std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // port 0 binds an ephemeral port. Returns the bound port.
  int Start(const std::string& host, int port);
  // Blocks until Stop() is called from another thread.
  void Wait();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// RELCOMP_PORT when set and valid, else `fallback`.
int PortFromEnvironment(int fallback);

}  // namespace relcomp

#endif  // RELCOMP_HTTP_SERVER_H_
