#ifndef VRFT_SERVICE_HPP_
#define VRFT_SERVICE_HPP_

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "json.hpp"

namespace vrft {

// Stateless scoring endpoint for external rollout workers. Requests carry
// everything needed to score one response; nothing persists between calls.
//
//   POST /v1/score        one ScoreRequest in, one ScoreResponse out
//   POST /v1/score_batch  array in, array out, order-preserving
//   GET  /healthz         readiness and version
//
// ScoreRequest:  {"task": "cls|det|seg|vqa_closed|vqa_open",
//                 "response": "...", "gt": {...},
//                 "lambda": number (optional, default 1),
//                 "image": {"h": int, "w": int} (segmentation only)}
// ScoreResponse: {"r_task", "r_format", "lambda", "total",
//                 "format_ok": bool,
//                 "extracted": {"answer": "..."} or {"box_count": n}}
struct ServiceConfig {
  std::string address = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
};

// Raised on malformed request bodies; mapped to HTTP 400.
class RequestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pure request handler behind the HTTP layer; service and tests share it so
// wire scoring is in-process scoring by construction.
nlohmann::json handle_score(const nlohmann::json& request);
nlohmann::json handle_health(bool ready);

class ScoreService {
 public:
  explicit ScoreService(ServiceConfig config);
  ~ScoreService();

  ScoreService(const ScoreService&) = delete;
  ScoreService& operator=(const ScoreService&) = delete;

  // Binds and serves on a background thread. Returns false when the address
  // cannot be bound.
  bool start();
  void stop();
  int port() const { return port_; }
  bool ready() const { return ready_.load(); }

 private:
  struct Impl;
  ServiceConfig config_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::atomic<bool> ready_{false};
  int port_ = 0;
};

}  // namespace vrft

#endif  // VRFT_SERVICE_HPP_
