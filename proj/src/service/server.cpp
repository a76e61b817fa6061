#include "repositioner/service/server.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <ctime>
#include <mutex>

namespace repositioner::service {

struct HttpServer::Impl {
  const Api& api;
  ServerOptions options;
  httplib::Server server;
  std::mutex log_mutex;

  Impl(const Api& a, ServerOptions o) : api(a), options(std::move(o)) {}
};

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

QueryParams params_of(const httplib::Request& req) {
  QueryParams q;
  for (const auto& [k, v] : req.params) q.emplace(k, v);  // first value wins
  return q;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

HttpServer::HttpServer(const Api& api, ServerOptions options) : impl_(std::make_unique<Impl>(api, std::move(options))) {
  auto& s = impl_->server;
  const Api& a = impl_->api;
  s.Get("/api/models", [&a](const httplib::Request&, httplib::Response& res) { send(res, a.models()); });
  s.Get("/api/entities",
        [&a](const httplib::Request& req, httplib::Response& res) { send(res, a.entities(params_of(req))); });
  s.Post("/api/predict", [&a](const httplib::Request& req, httplib::Response& res) { send(res, a.predict(req.body)); });
  s.Get(R"(/api/drugs/([^/]+))",
        [&a](const httplib::Request& req, httplib::Response& res) { send(res, a.drug(req.matches[1].str())); });
  s.Get("/api/explain",
        [&a](const httplib::Request& req, httplib::Response& res) { send(res, a.explain(params_of(req))); });
  if (!impl_->options.static_dir.empty())
    require(s.set_mount_point("/", impl_->options.static_dir.string()), ErrorCode::io,
            "cannot serve static files from " + impl_->options.static_dir.string());
  if (impl_->options.log) {
    Impl* impl = impl_.get();
    s.set_logger([impl](const httplib::Request& req, const httplib::Response& res) {
      const nlohmann::ordered_json line = {{"ts", utc_now()},
                                           {"method", req.method},
                                           {"path", req.path},
                                           {"status", res.status},
                                           {"bytes", res.body.size()}};
      std::lock_guard lock(impl->log_mutex);
      *impl->options.log << line.dump() << '\n' << std::flush;
    });
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    o.port = impl_->server.bind_to_any_port(o.host);
    require(o.port > 0, ErrorCode::io, "cannot bind " + o.host);
  } else {
    require(impl_->server.bind_to_port(o.host, o.port), ErrorCode::io,
            "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  return o.port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace repositioner::service
