#include "relcomp/http_server.h"

#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "httplib.h"

namespace relcomp {

struct HttpServer::Impl {
  Impl(SessionService& svc, std::optional<std::filesystem::path> dir)
      : service(svc), static_dir(std::move(dir)) {}

  SessionService& service;
  std::optional<std::filesystem::path> static_dir;
  httplib::Server server;
  std::thread thread;
};

namespace {

void Reply(httplib::Response& res, const ServiceResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(SessionService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service, std::move(static_dir))) {
  auto& svr = impl_->server;
  SessionService& svc = impl_->service;
  svr.Get("/v1/status", [&svc](const httplib::Request&, httplib::Response& res) {
    Reply(res, svc.GetStatus());
  });
  svr.Get("/v1/query", [&svc](const httplib::Request&, httplib::Response& res) {
    Reply(res, svc.GetQuery());
  });
  svr.Get("/v1/metric", [&svc](const httplib::Request&, httplib::Response& res) {
    Reply(res, svc.GetMetric());
  });
  svr.Get("/v1/history", [&svc](const httplib::Request&, httplib::Response& res) {
    Reply(res, svc.GetHistory());
  });
  svr.Post("/v1/answer", [&svc](const httplib::Request& req, httplib::Response& res) {
    Reply(res, svc.PostAnswer(req.body));
  });
  if (impl_->static_dir && !svr.set_mount_point("/", impl_->static_dir->string()))
    throw std::invalid_argument("static directory " + impl_->static_dir->string() +
                                " does not exist");
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Start(const std::string& host, int port) {
  auto& svr = impl_->server;
  int bound = port == 0 ? svr.bind_to_any_port(host) : (svr.bind_to_port(host, port) ? port : -1);
  if (bound <= 0)
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&svr] { svr.listen_after_bind(); });
  return bound;
}

void HttpServer::Wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::Stop() {
  impl_->server.stop();
  Wait();
}

int PortFromEnvironment(int fallback) {
  const char* value = std::getenv("RELCOMP_PORT");
  if (!value || !*value) return fallback;
  char* end = nullptr;
  long port = std::strtol(value, &end, 10);
  if (*end != '\0' || port < 0 || port > 65535) return fallback;
  return static_cast<int>(port);
}

}  // namespace relcomp
