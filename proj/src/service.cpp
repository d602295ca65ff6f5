#include "vrft/service.hpp"

#include <cmath>

#include "httplib.h"
#include "vrft/response_parser.hpp"
#include "vrft/reward.hpp"
#include "vrft/version.hpp"
#include "vrft/wire.hpp"

namespace vrft {

namespace {

using nlohmann::json;

json score_request(const json& request) {
  if (!request.is_object()) {
    throw RequestError("request body must be a JSON object");
  }
  const std::string task_string = request.value("task", std::string{});
  const auto task = task_from_name(task_string);
  if (!task) {
    throw RequestError("unknown task \"" + task_string + "\"");
  }
  if (!request.contains("response") || !request["response"].is_string()) {
    throw RequestError("missing string field \"response\"");
  }
  const std::string response = request["response"].get<std::string>();
  if (!request.contains("gt")) {
    throw RequestError("missing field \"gt\"");
  }
  RewardConfig cfg;
  if (request.contains("lambda")) {
    if (!request["lambda"].is_number()) {
      throw RequestError("field \"lambda\" must be a number");
    }
    cfg.lambda = request["lambda"].get<double>();
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
      throw RequestError("field \"lambda\" must be finite and non-negative");
    }
  }
  GroundTruth gt;
  ScoreContext ctx;
  try {
    gt = wire::ground_truth_from_json(request["gt"], *task);
    if (request.contains("image")) {
      ctx.image = wire::image_dims_from_json(request["image"]);
    }
  } catch (const wire::SchemaError& e) {
    throw RequestError(e.what());
  }

  RewardBreakdown breakdown;
  try {
    breakdown = score(*task, response, gt, cfg, ctx);
  } catch (const std::invalid_argument& e) {
    throw RequestError(e.what());
  }

  const ParsedResponse parsed = parse_response(response);
  json extracted;
  if (*task == TaskKind::Detection || *task == TaskKind::Segmentation) {
    extracted["box_count"] = parse_boxes(
        parsed.answer ? std::string_view(*parsed.answer)
                      : std::string_view{}).size();
  } else {
    extracted["answer"] = parsed.answer ? *parsed.answer : std::string{};
  }
  return json{{"r_task", breakdown.r_task},
              {"r_format", breakdown.r_format},
              {"lambda", breakdown.lambda},
              {"total", breakdown.total},
              {"format_ok", parsed.format_ok},
              {"extracted", std::move(extracted)}};
}

}  // namespace

json handle_score(const json& request) { return score_request(request); }

json handle_health(bool ready) {
  return json{{"status", ready ? "ok" : "shutting_down"},
              {"ready", ready},
              {"version", kVersion}};
}

struct ScoreService::Impl {
  httplib::Server server;
};

ScoreService::ScoreService(ServiceConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  auto& server = impl_->server;

  server.Post("/v1/score", [](const httplib::Request& req,
                              httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", std::string("invalid JSON: ") + e.what()}}
                          .dump(),
                      "application/json");
      return;
    }
    try {
      res.set_content(handle_score(body).dump(), "application/json");
    } catch (const RequestError& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });

  server.Post("/v1/score_batch", [](const httplib::Request& req,
                                    httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", std::string("invalid JSON: ") + e.what()}}
                          .dump(),
                      "application/json");
      return;
    }
    if (!body.is_array()) {
      res.status = 400;
      res.set_content(json{{"error", "batch body must be a JSON array"}}.dump(),
                      "application/json");
      return;
    }
    json out = json::array();
    try {
      for (const json& item : body) {
        try {
          out.push_back(handle_score(item));
        } catch (const RequestError& e) {
          out.push_back(json{{"error", e.what()}});
        }
      }
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    res.set_content(out.dump(), "application/json");
  });

  server.Get("/healthz", [this](const httplib::Request&,
                                httplib::Response& res) {
    const bool ready = ready_.load();
    res.status = ready ? 200 : 503;
    res.set_content(handle_health(ready).dump(), "application/json");
  });
}

ScoreService::~ScoreService() { stop(); }

bool ScoreService::start() {
  auto& server = impl_->server;
  if (config_.port == 0) {
    port_ = server.bind_to_any_port(config_.address);
    if (port_ < 0) return false;
  } else {
    if (!server.bind_to_port(config_.address, config_.port)) return false;
    port_ = config_.port;
  }
  ready_.store(true);
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  server.wait_until_ready();
  return true;
}

void ScoreService::stop() {
  if (!thread_.joinable()) return;
  ready_.store(false);  // health reports not-ready while draining
  impl_->server.stop();
  thread_.join();
}

}  // namespace vrft
