#include "pmod/services/http.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"

namespace pmod::services {

using nlohmann::json;

namespace {

int status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::unauthorized: return 401;
    case ErrorKind::not_found: return 404;
    case ErrorKind::integrity: return 409;
    case ErrorKind::io: return 500;
    default: return 400;
  }
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  res.status = status_for(kind);
  res.set_content(json{{"error", error_kind_name(kind)}, {"message", message}}.dump(), "application/json");
}

// Runs a handler and turns library errors into JSON error responses.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_error(res, e.kind(), e.what());
  } catch (const json::exception& e) {
    send_error(res, ErrorKind::format, std::string("bad request body: ") + e.what());
  }
}

void send_json(httplib::Response& res, const json& j) { res.set_content(j.dump(), "application/json"); }

std::unique_ptr<httplib::Client> client_for(const std::string& url) {
  auto c = std::make_unique<httplib::Client>(url);
  c->set_connection_timeout(5);
  c->set_read_timeout(30);
  c->set_write_timeout(30);
  return c;
}

json expect_ok(const httplib::Result& r, const std::string& what) {
  if (!r) throw IoError(what + ": " + httplib::to_string(r.error()));
  json body;
  try {
    body = json::parse(r->body);
  } catch (const json::exception&) {
    throw FormatError(what + ": HTTP " + std::to_string(r->status) + " with a non-JSON body");
  }
  if (r->status >= 200 && r->status < 300) return body;
  const auto kind = error_kind_from_name(body.value("error", std::string{}));
  throw_error(kind.value_or(ErrorKind::io), what + ": " + body.value("message", std::string("HTTP error")));
}

}  // namespace

HttpService::HttpService() : server_(std::make_unique<httplib::Server>()) {}

HttpService::~HttpService() { stop(); }

void HttpService::start(const std::string& host, int port, TrafficObserver observer) {
  if (observer) {
    server_->set_logger([observer = std::move(observer)](const httplib::Request& req, const httplib::Response& res) {
      observer(req.method, req.path, req.body, res.body);
    });
  }
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpService::stop() {
  if (server_) server_->stop();
  wait();
}

void HttpService::wait() {
  if (thread_.joinable()) thread_.join();
}

IssuerService::IssuerService(KeyIssuer& issuer, const std::string& host, int port, TrafficObserver observer) {
  server().Get("/v1/params", [&issuer](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      send_json(res, {{"backend", issuer.public_key().ctx->backend_id()},
                      {"public_key", base64_encode(issuer.public_params())}});
    });
  });
  server().Post("/v1/keys", [&issuer](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string token;
      const auto auth = req.get_header_value("Authorization");
      if (auth.rfind("Bearer ", 0) == 0) token = auth.substr(7);
      auto body = json::parse(req.body);
      const auto requester = body.at("requester").get<std::string>();
      policy::AttributeSet attrs(body.at("attributes").get<std::vector<std::string>>());
      auto sk = issuer.issue_key(requester, attrs, token);
      send_json(res, {{"private_key", base64_encode(abe::serialize(sk))},
                      {"fingerprint", key_fingerprint(sk)}});
    });
  });
  start(host, port, std::move(observer));
}

StoreService::StoreService(FsBundleStore& store, const std::string& host, int port, TrafficObserver observer) {
  server().Put(R"(/v1/bundles/([0-9a-f]{64}))", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = json::parse(req.body);
      auto bundle = SealedBundle::from_bytes(base64_decode(body.at("bundle").get<std::string>()));
      const std::string claimed = req.matches[1];
      auto ref = store.put(bundle);
      if (ref.id != claimed) throw IntegrityError("bundle digest " + ref.id + " does not match the URL id");
      res.status = 201;
      send_json(res, {{"id", ref.id}});
    });
  });
  server().Get(R"(/v1/bundles/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto bundle = store.get(req.matches[1]);
      send_json(res, {{"id", std::string(req.matches[1])}, {"bundle", base64_encode(bundle.bytes())}});
    });
  });
  start(host, port, std::move(observer));
}

abe::PublicKey IssuerClient::params() const {
  auto c = client_for(url_);
  auto body = expect_ok(c->Get("/v1/params"), "GET /v1/params");
  return abe::deserialize_public_key(base64_decode(body.at("public_key").get<std::string>()));
}

abe::PrivateKey IssuerClient::issue(const std::string& requester, const policy::AttributeSet& attrs,
                                    const std::string& token) const {
  auto c = client_for(url_);
  httplib::Headers headers{{"Authorization", "Bearer " + token}};
  json req{{"requester", requester}, {"attributes", std::vector<std::string>(attrs.begin(), attrs.end())}};
  auto body = expect_ok(c->Post("/v1/keys", headers, req.dump(), "application/json"), "POST /v1/keys");
  return abe::deserialize_private_key(base64_decode(body.at("private_key").get<std::string>()));
}

StoreRef StoreClient::put(const SealedBundle& bundle) const {
  auto c = client_for(url_);
  const auto id = to_hex(sha256(bundle.bytes()));
  json req{{"bundle", base64_encode(bundle.bytes())}};
  auto body = expect_ok(c->Put("/v1/bundles/" + id, req.dump(), "application/json"), "PUT /v1/bundles");
  return {body.at("id").get<std::string>(), url_ + "/v1/bundles/" + id};
}

SealedBundle StoreClient::get(const std::string& id) const {
  if (!is_object_id(id)) throw InvalidArgument("malformed bundle id");
  auto c = client_for(url_);
  auto body = expect_ok(c->Get("/v1/bundles/" + id), "GET /v1/bundles");
  Bytes bytes = base64_decode(body.at("bundle").get<std::string>());
  if (to_hex(sha256(bytes)) != id) throw IntegrityError("server returned a bundle that does not match " + id);
  return SealedBundle::from_bytes(std::move(bytes));
}

}  // namespace pmod::services
