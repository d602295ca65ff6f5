#include <atomic>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "vrft/reward.hpp"
#include "vrft/service.hpp"
#include "vrft/version.hpp"
#include "vrft/wire.hpp"

using namespace vrft;
using nlohmann::json;

TEST_CASE("handle_score mirrors in-process scoring") {
  SUBCASE("classification") {
    const json request{{"task", "cls"},
                       {"response", "<think>t</think><answer>(B)</answer>"},
                       {"gt", {{"label", "B"}}}};
    const json response = handle_score(request);
    CHECK(response["total"] == 2.0);
    CHECK(response["r_task"] == 1.0);
    CHECK(response["r_format"] == 1.0);
    CHECK(response["format_ok"] == true);
    CHECK(response["extracted"]["answer"] == "(B)");
  }
  SUBCASE("detection with an empty response") {
    const json request{{"task", "det"},
                       {"response", ""},
                       {"gt", {{"boxes", {{0, 0, 10, 10}}}}}};
    const json response = handle_score(request);
    CHECK(response["r_task"] == 0.0);
    CHECK(response["extracted"]["box_count"] == 0);
  }
  SUBCASE("segmentation carries image dims") {
    const json request{
        {"task", "seg"},
        {"response", "<think>t</think><answer>[[0,0,4,4]]</answer>"},
        {"gt", {{"mask", {{"size", {4, 4}}, {"rle", {0, 16}}}}}},
        {"image", {{"h", 4}, {"w", 4}}}};
    const json response = handle_score(request);
    CHECK(response["r_task"] == 1.0);
    CHECK(response["total"] == 2.0);
  }
  SUBCASE("variant mismatch is a request error") {
    const json request{{"task", "det"},
                       {"response", "x"},
                       {"gt", {{"label", "A"}}}};
    CHECK_THROWS_AS(handle_score(request), RequestError);
  }
  SUBCASE("unknown task and malformed lambda") {
    CHECK_THROWS_AS(handle_score(json{{"task", "nope"},
                                      {"response", "x"},
                                      {"gt", json::object()}}),
                    RequestError);
    CHECK_THROWS_AS(handle_score(json{{"task", "cls"},
                                      {"response", "x"},
                                      {"gt", {{"label", "A"}}},
                                      {"lambda", "one"}}),
                    RequestError);
  }
}

TEST_CASE("health payload") {
  const json up = handle_health(true);
  CHECK(up["status"] == "ok");
  CHECK(up["ready"] == true);
  CHECK(up["version"] == kVersion);
  const json down = handle_health(false);
  CHECK(down["status"] == "shutting_down");
  CHECK(down["ready"] == false);
}

TEST_CASE("service round trip over HTTP") {
  ScoreService service(ServiceConfig{"127.0.0.1", 0});
  REQUIRE(service.start());
  REQUIRE(service.port() > 0);
  httplib::Client client("127.0.0.1", service.port());

  SUBCASE("health endpoint") {
    const auto result = client.Get("/healthz");
    REQUIRE(result);
    CHECK(result->status == 200);
    const json body = json::parse(result->body);
    CHECK(body["status"] == "ok");
    CHECK(body["version"] == kVersion);
  }
  SUBCASE("score equals in-process scoring") {
    const json request{{"task", "cls"},
                       {"response", "<think>t</think><answer>(A)</answer>"},
                       {"gt", {{"label", "A"}}}};
    const auto result =
        client.Post("/v1/score", request.dump(), "application/json");
    REQUIRE(result);
    CHECK(result->status == 200);
    const json body = json::parse(result->body);
    const RewardBreakdown expected =
        score(TaskKind::Classification,
              "<think>t</think><answer>(A)</answer>", ClsLabel{'A'});
    CHECK(body["total"] == expected.total);
    CHECK(body["r_task"] == expected.r_task);
  }
  SUBCASE("malformed bodies get a 400 with a reason") {
    const auto bad_json = client.Post("/v1/score", "{oops", "application/json");
    REQUIRE(bad_json);
    CHECK(bad_json->status == 400);
    CHECK(json::parse(bad_json->body).contains("error"));

    const auto bad_request = client.Post(
        "/v1/score", json{{"task", "det"}, {"response", "x"},
                          {"gt", {{"label", "A"}}}}
                         .dump(),
        "application/json");
    REQUIRE(bad_request);
    CHECK(bad_request->status == 400);
  }
  SUBCASE("batch preserves order and isolates per-item errors") {
    json batch = json::array();
    batch.push_back(json{{"task", "cls"},
                         {"response", "<think>t</think><answer>(A)</answer>"},
                         {"gt", {{"label", "A"}}}});
    batch.push_back(json{{"task", "cls"},
                         {"response", "(B)"},
                         {"gt", {{"label", "A"}}}});
    batch.push_back(json{{"task", "nope"},
                         {"response", ""},
                         {"gt", json::object()}});
    const auto result =
        client.Post("/v1/score_batch", batch.dump(), "application/json");
    REQUIRE(result);
    CHECK(result->status == 200);
    const json body = json::parse(result->body);
    REQUIRE(body.size() == 3);
    CHECK(body[0]["total"] == 2.0);
    CHECK(body[1]["total"] == 0.0);
    CHECK(body[2].contains("error"));

    const auto not_array =
        client.Post("/v1/score_batch", "{}", "application/json");
    REQUIRE(not_array);
    CHECK(not_array->status == 400);
  }
  service.stop();
  CHECK(!service.ready());
}

TEST_CASE("concurrent scoring is stateless") {
  ScoreService service(ServiceConfig{"127.0.0.1", 0});
  REQUIRE(service.start());
  constexpr int kThreads = 8;
  constexpr int kPerThread = 25;
  std::atomic<int> mismatches{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < kThreads; ++t) {
    workers.emplace_back([&, t] {
      httplib::Client client("127.0.0.1", service.port());
      for (int i = 0; i < kPerThread; ++i) {
        const char letter = static_cast<char>('A' + (t + i) % 4);
        const json request{
            {"task", "cls"},
            {"response", std::string("<think>t</think><answer>(") + letter +
                             ")</answer>"},
            {"gt", {{"label", "A"}}}};
        const auto result =
            client.Post("/v1/score", request.dump(), "application/json");
        if (!result || result->status != 200) {
          ++mismatches;
          continue;
        }
        const json body = json::parse(result->body);
        const double expected = letter == 'A' ? 2.0 : 1.0;
        if (body["total"] != expected) ++mismatches;
      }
    });
  }
  for (auto& worker : workers) worker.join();
  CHECK(mismatches == 0);
  service.stop();
}
