#pragma once

#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "pmod/abe/abe.hpp"
#include "pmod/services/issuer.hpp"
#include "pmod/services/store.hpp"

namespace httplib {
class Server;
}

namespace pmod::services {

// Sees every request and response body a server handles.
using TrafficObserver = std::function<void(const std::string& method, const std::string& path,
                                           const std::string& request_body,
                                           const std::string& response_body)>;

// Background HTTP server. Binds on construction, serves until stop() or
// destruction.
class HttpService {
 public:
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  void stop();
  // Blocks until the server stops.
  void wait();

 protected:
  HttpService();
  void start(const std::string& host, int port, TrafficObserver observer);
  httplib::Server& server() { return *server_; }

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// GET /v1/params, POST /v1/keys.
class IssuerService : public HttpService {
 public:
  IssuerService(KeyIssuer& issuer, const std::string& host = "127.0.0.1", int port = 0,
                TrafficObserver observer = {});
};

// PUT /v1/bundles/{id}, GET /v1/bundles/{id}.
class StoreService : public HttpService {
 public:
  StoreService(FsBundleStore& store, const std::string& host = "127.0.0.1", int port = 0,
               TrafficObserver observer = {});
};

class IssuerClient {
 public:
  explicit IssuerClient(std::string base_url) : url_(std::move(base_url)) {}
  abe::PublicKey params() const;
  abe::PrivateKey issue(const std::string& requester, const policy::AttributeSet& attrs,
                        const std::string& token) const;

 private:
  std::string url_;
};

class StoreClient {
 public:
  explicit StoreClient(std::string base_url) : url_(std::move(base_url)) {}
  StoreRef put(const SealedBundle& bundle) const;
  SealedBundle get(const std::string& id) const;

 private:
  std::string url_;
};

}  // namespace pmod::services
