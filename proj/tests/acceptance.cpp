// Acceptance suite: one criterion per check, one PASS/FAIL line each.
// Usage: acceptance_tests <path-to-vrft-cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "oracles.hpp"
#include "vrft/eval.hpp"
#include "vrft/grpo.hpp"
#include "vrft/image_scaling.hpp"
#include "vrft/metrics.hpp"
#include "vrft/service.hpp"
#include "vrft/stats.hpp"
#include "vrft/wire.hpp"

using namespace vrft;
using nlohmann::json;

namespace {

std::string g_cli_path;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

BoundingBox random_int_box(std::mt19937_64& rng, int extent) {
  const int x = static_cast<int>(rng() % (extent - 2));
  const int y = static_cast<int>(rng() % (extent - 2));
  const int w = 1 + static_cast<int>(rng() % (extent - x - 1));
  const int h = 1 + static_cast<int>(rng() % (extent - y - 1));
  return BoundingBox{static_cast<double>(x), static_cast<double>(y),
                     static_cast<double>(x + w), static_cast<double>(y + h)};
}

// --- 1. metric-oracle equivalence ---------------------------------------

Outcome criterion_metric_oracles() {
  std::mt19937_64 rng(20240601);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e",
                                       "f", "g", "h"};
  int instances = 0;
  for (int trial = 0; trial < 1200; ++trial) {
    // Boxes: AP at a random threshold plus IoU, vs brute force.
    std::vector<BoundingBox> preds(rng() % 6);
    std::vector<BoundingBox> gts(rng() % 6);
    for (auto& b : preds) b = random_int_box(rng, 48);
    for (auto& b : gts) b = random_int_box(rng, 48);
    const double threshold =
        0.1 + 0.8 * static_cast<double>(rng() % 9) / 9.0;
    const double ap = average_precision(preds, gts, threshold);
    const double ap_oracle = oracles::ap_exhaustive(preds, gts, threshold);
    if (std::abs(ap - ap_oracle) > 1e-12) {
      return {false, "AP mismatch at trial " + std::to_string(trial)};
    }
    if (!preds.empty() && !gts.empty()) {
      const double fast = iou(preds[0], gts[0]);
      const double slow = oracles::iou_rasterized(preds[0], gts[0]);
      if (std::abs(fast - slow) > 1e-12) {
        return {false, "IoU mismatch at trial " + std::to_string(trial)};
      }
    }

    // Masks up to 64x64 vs pixel counting.
    const int h = 1 + static_cast<int>(rng() % 64);
    const int w = 1 + static_cast<int>(rng() % 64);
    BinaryMask x(h, w);
    BinaryMask y(h, w);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (rng() % 3 == 0) x.set(r, c);
        if (rng() % 3 == 0) y.set(r, c);
      }
    }
    if (std::abs(dice(x, y) - oracles::dice_pixels(x, y)) > 1e-12) {
      return {false, "dice mismatch at trial " + std::to_string(trial)};
    }

    // Sentences up to 20 tokens vs the counting oracle.
    std::vector<std::string> cand(rng() % 21);
    std::vector<std::string> ref(1 + rng() % 20);
    for (auto& t : cand) t = vocab[rng() % vocab.size()];
    for (auto& t : ref) t = vocab[rng() % vocab.size()];
    const auto got = bleu4(std::span<const std::string>(cand),
                           std::span<const std::string>(ref));
    const auto expected = oracles::bleu_counted(cand, ref);
    if (std::abs(got.score - expected.score) > 1e-12) {
      return {false, "bleu mismatch at trial " + std::to_string(trial)};
    }
    ++instances;
  }
  return {true, std::to_string(instances) + " randomized instances"};
}

// --- 2. GRPO math --------------------------------------------------------

Outcome criterion_grpo_math() {
  const std::vector<double> spike{2, 0, 0, 0, 0, 0, 0, 0};
  const auto advantages = compute_advantages(spike);
  if (std::abs(advantages[0] - 2.6457513110645906) > 1e-9) {
    return {false, "spike advantage off: " + std::to_string(advantages[0])};
  }
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t g = 2 + rng() % 15;
    std::vector<double> rewards(g);
    for (auto& r : rewards) r = static_cast<double>(rng() % 40) / 10.0;
    const auto a = compute_advantages(rewards);
    const bool zero = std::all_of(a.begin(), a.end(),
                                  [](double v) { return v == 0.0; });
    if (zero) continue;
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(g);
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    var /= static_cast<double>(g);
    if (std::abs(mean) > 1e-9 || std::abs(std::sqrt(var) - 1.0) > 1e-9) {
      return {false, "normalization failed at trial " + std::to_string(trial)};
    }
  }
  for (int trial = 0; trial < 20000; ++trial) {
    const double ln = -12.0 * uniform(rng);
    const double lr = -12.0 * uniform(rng);
    if (kl_estimate(ln, lr) < 0.0) {
      return {false, "k3 went negative"};
    }
  }
  if (kl_estimate(-2.5, -2.5) != 0.0) {
    return {false, "k3 at rho=1 is not exactly zero"};
  }
  return {true, "spike case, 1e4 normalizations, k3 bounds"};
}

// --- 3. gradient checks --------------------------------------------------

template <typename F>
double central_difference(F&& f, ToyPolicy& policy, int k, double h = 1e-5) {
  const double original = policy.logits(0)[k];
  policy.set_logit(0, k, original + h);
  const double above = f();
  policy.set_logit(0, k, original - h);
  const double below = f();
  policy.set_logit(0, k, original);
  return (above - below) / (2.0 * h);
}

Outcome criterion_gradients() {
  std::mt19937_64 rng(9090);
  GrpoConfig cfg;
  cfg.kl_coeff = 0.02;
  int grpo_checks = 0;
  int sft_checks = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int candidates = 3 + static_cast<int>(rng() % 4);
    ToyPolicy policy(std::vector<int>{candidates});
    ToyPolicy old_policy(std::vector<int>{candidates});
    ToyPolicy ref_policy(std::vector<int>{candidates});
    for (int c = 0; c < candidates; ++c) {
      policy.set_logit(0, c, (uniform(rng) - 0.5) * 2.0);
      old_policy.set_logit(0, c, (uniform(rng) - 0.5) * 2.0);
      ref_policy.set_logit(0, c, (uniform(rng) - 0.5) * 2.0);
    }
    const int group = 4 + static_cast<int>(rng() % 5);
    std::vector<int> sampled(group);
    std::vector<double> rewards(group);
    for (int i = 0; i < group; ++i) {
      sampled[i] = static_cast<int>(rng() % candidates);
      rewards[i] = static_cast<double>(rng() % 5) / 2.0;
    }
    const GroupRollout rollout = build_rollout(
        policy, old_policy, ref_policy, 0, sampled, rewards, cfg);
    bool near_boundary = false;
    for (std::size_t g = 0; g < rollout.candidates.size(); ++g) {
      const double rho = std::exp(rollout.logp_new[g] - rollout.logp_old[g]);
      if (std::abs(rho - 0.8) < 1e-3 || std::abs(rho - 1.2) < 1e-3) {
        near_boundary = true;
      }
    }
    if (near_boundary) continue;
    const auto grad = grpo_objective_gradient(policy, rollout, cfg);
    for (int k = 0; k < candidates; ++k) {
      const double numeric = central_difference(
          [&] {
            return grpo_objective(build_rollout(policy, old_policy,
                                                ref_policy, 0, sampled,
                                                rewards, cfg),
                                  cfg);
          },
          policy, k);
      const double scale = std::max({1.0, std::abs(grad[k]),
                                     std::abs(numeric)});
      if (std::abs(grad[k] - numeric) / scale >= 1e-5) {
        return {false, "grpo gradient mismatch at trial " +
                           std::to_string(trial)};
      }
      ++grpo_checks;
    }

    // SFT loss gradient via one unit-rate step.
    ToyPolicy sft_policy = policy;
    const std::vector<SftExample> batch{
        {0, static_cast<int>(rng() % candidates)}};
    std::vector<double> before(sft_policy.logits(0).begin(),
                               sft_policy.logits(0).end());
    sft_step(sft_policy, batch, 1.0);
    for (int k = 0; k < candidates; ++k) {
      const double analytic = -(sft_policy.logits(0)[k] - before[k]);
      ToyPolicy probe = policy;
      const double numeric = central_difference(
          [&] { return sft_loss(probe, batch); }, probe, k);
      const double scale = std::max({1.0, std::abs(analytic),
                                     std::abs(numeric)});
      if (std::abs(analytic - numeric) / scale >= 1e-5) {
        return {false, "sft gradient mismatch at trial " +
                           std::to_string(trial)};
      }
      ++sft_checks;
    }
  }
  if (grpo_checks < 100 || sft_checks < 100) {
    return {false, "too few gradient checks ran"};
  }
  return {true, std::to_string(grpo_checks) + " grpo + " +
                    std::to_string(sft_checks) + " sft logit checks"};
}

// --- 4. toy convergence --------------------------------------------------

Outcome criterion_toy_convergence() {
  const std::filesystem::path config_path =
      std::filesystem::path(VRFT_CONFIG_DIR) / "train_mcq.json";
  ToyTrainConfig config = load_toy_train_config(config_path);
  if (config.tasks.size() != 8 || config.grpo.group_size != 8 ||
      config.grpo.clip_epsilon != 0.2 || config.grpo.kl_coeff != 0.001 ||
      config.grpo.seed != 42 || config.grpo.iterations > 500) {
    return {false, "shipped config does not match the documented settings"};
  }
  for (const ToyTask& task : config.tasks) {
    if (task.candidates.size() != 4) {
      return {false, "each prompt must have four candidates"};
    }
  }
  const ToyTrainResult result = run_toy_training(config);
  if (result.sft_losses.empty()) {
    return {false, "config must include an SFT phase"};
  }
  if (std::abs(result.sft_losses.front() - std::log(4.0)) > 1e-9) {
    return {false, "initial SFT loss is not ln 4: " +
                       std::to_string(result.sft_losses.front())};
  }
  if (result.sft_final_loss >= 0.05) {
    return {false, "final SFT loss too high: " +
                       std::to_string(result.sft_final_loss)};
  }
  if (result.final_mean_reward < 1.9) {
    return {false, "final mean reward " +
                       std::to_string(result.final_mean_reward) + " < 1.9"};
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "sft %.6f -> %.6f, final mean reward %.4f",
                result.sft_losses.front(), result.sft_final_loss,
                result.final_mean_reward);
  return {true, detail};
}

// --- 5. resize planner ---------------------------------------------------

Outcome criterion_resize() {
  for (const auto& [budget, expected] :
       std::vector<std::pair<std::int64_t, std::int64_t>>{{256, 448},
                                                          {1024, 896}}) {
    const ResizePlan plan = plan_resize(1000, 1000, budget, 28);
    const auto oracle = oracles::resize_exhaustive(1000, 1000, budget, 28);
    if (plan.output_height != expected || plan.output_width != expected ||
        oracle.height != expected || oracle.width != expected) {
      return {false, "pinned case disagrees with the oracle"};
    }
  }
  std::mt19937_64 rng(515151);
  for (int trial = 0; trial < 100000; ++trial) {
    const std::int64_t h = 1 + static_cast<std::int64_t>(rng() % 5000);
    const std::int64_t w = 1 + static_cast<std::int64_t>(rng() % 5000);
    const std::int64_t budget = (trial % 2 == 0) ? 256 : 1024;
    const ResizePlan plan = plan_resize(h, w, budget, 28);
    if (plan.output_height % 28 != 0 || plan.output_width % 28 != 0 ||
        plan.output_height < 28 || plan.output_width < 28 ||
        plan.tokens > budget) {
      return {false, "invariant violated at trial " + std::to_string(trial)};
    }
  }
  return {true, "1e5 plans aligned and within budget; pinned cases exact"};
}

// --- 6. statistics -------------------------------------------------------

Outcome criterion_statistics() {
  const std::vector<double> a{1, 2, 3, 4, 5, 6};
  const std::vector<double> b{0.5, 1, 2, 3, 4, 5};
  if (wilcoxon_signed_rank(a, b) != 0.03125) {
    return {false, "six positive differences must give exactly 0.03125"};
  }
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(25);
    std::vector<double> y(25);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = static_cast<double>(rng() % 1000) / 100.0;
      y[i] = static_cast<double>(rng() % 1000) / 100.0;
    }
    const double exact = wilcoxon_signed_rank(x, y, WilcoxonMethod::Exact);
    const double normal = wilcoxon_signed_rank(x, y, WilcoxonMethod::Normal);
    if (std::abs(exact - normal) >= 0.02) {
      return {false, "exact/normal gap " + std::to_string(exact - normal)};
    }
  }
  const std::vector<double> constant(30, 0.42);
  const auto c1 = bootstrap_mean_ci(constant, 1000, 42);
  const auto c2 = bootstrap_mean_ci(constant, 1000, 42);
  if (c1.lo != 0.42 || c1.hi != 0.42 || c2.lo != c1.lo || c2.hi != c1.hi) {
    return {false, "bootstrap not degenerate or not deterministic"};
  }
  std::vector<double> mixed(40);
  for (auto& v : mixed) v = uniform(rng);
  const auto d1 = bootstrap_mean_ci(mixed, 1000, 7);
  const auto d2 = bootstrap_mean_ci(mixed, 1000, 7);
  if (d1.lo != d2.lo || d1.hi != d2.hi) {
    return {false, "bootstrap CIs differ across identical seeds"};
  }
  return {true, "exact p, approximation gap < 0.02, deterministic CIs"};
}

// --- 7. reward composition fuzz ------------------------------------------

Outcome criterion_reward_fuzz() {
  std::mt19937_64 rng(424242);
  const std::vector<std::string> responses{
      "<think>t</think><answer>(A)</answer>",
      "<think>t</think><answer>[[0,0,8,8]]</answer>",
      "<think>t</think><answer>yes</answer>",
      "(B)",
      "[[1,1,4,4],[2,2,6,6]]",
      "free text with no structure",
      "",
      "<answer>broken</answer>",
      "<think>only a think block</think>",
  };
  const std::vector<double> lambdas{0.0, 0.3, 1.0, 2.0};
  for (int trial = 0; trial < 10000; ++trial) {
    // Random response, occasionally mutated with random bytes.
    std::string response = responses[rng() % responses.size()];
    if (rng() % 5 == 0) {
      for (int i = 0; i < 6; ++i) {
        response.push_back(static_cast<char>(rng() % 256));
      }
    }
    RewardConfig cfg;
    cfg.lambda = lambdas[rng() % lambdas.size()];
    const int which = static_cast<int>(rng() % 5);
    TaskKind task;
    GroundTruth gt;
    switch (which) {
      case 0:
        task = TaskKind::Classification;
        gt = ClsLabel{static_cast<char>('A' + rng() % 6)};
        break;
      case 1: {
        task = TaskKind::Detection;
        DetBoxes boxes;
        const int count = static_cast<int>(rng() % 4);
        for (int i = 0; i < count; ++i) {
          boxes.boxes.push_back(random_int_box(rng, 32));
        }
        gt = std::move(boxes);
        break;
      }
      case 2: {
        task = TaskKind::Segmentation;
        const int h = 1 + static_cast<int>(rng() % 32);
        const int w = 1 + static_cast<int>(rng() % 32);
        BinaryMask mask(h, w);
        for (int r = 0; r < h; ++r) {
          for (int c = 0; c < w; ++c) {
            if (rng() % 4 == 0) mask.set(r, c);
          }
        }
        gt = SegMask{std::move(mask)};
        break;
      }
      case 3:
        task = TaskKind::VqaClosed;
        gt = ClosedAnswer{rng() % 2 ? "yes" : "B"};
        break;
      default:
        task = TaskKind::VqaOpen;
        gt = OpenAnswer{"dense lymphocytic infiltration of the stroma"};
        break;
    }
    const RewardBreakdown breakdown = score(task, response, gt, cfg);
    if (breakdown.total - breakdown.r_task -
            breakdown.lambda * breakdown.r_format != 0.0) {
      return {false, "composite identity violated at trial " +
                         std::to_string(trial)};
    }
    if (breakdown.r_task < 0.0 || breakdown.r_task > 1.0) {
      return {false, "r_task out of range at trial " + std::to_string(trial)};
    }
    if (breakdown.r_format != 0.0 && breakdown.r_format != 1.0) {
      return {false, "r_format not binary at trial " + std::to_string(trial)};
    }
  }
  return {true, "1e4 random (task, response, gt) triples"};
}

// --- 8. service equivalence ----------------------------------------------

json make_request(std::mt19937_64& rng, int index) {
  switch (index % 4) {
    case 0:
      return json{{"task", "cls"},
                  {"response",
                   std::string("<think>t</think><answer>(") +
                       static_cast<char>('A' + rng() % 4) + ")</answer>"},
                  {"gt", {{"label", "A"}}}};
    case 1: {
      const int x = static_cast<int>(rng() % 20);
      return json{
          {"task", "det"},
          {"response", "<think>t</think><answer>[[" + std::to_string(x) +
                           ",0,10,10]]</answer>"},
          {"gt", {{"boxes", {{0, 0, 10, 10}}}}}};
    }
    case 2:
      return json{{"task", "vqa_open"},
                  {"response",
                   rng() % 2 ? "<think>t</think><answer>the stroma shows "
                               "dense infiltration</answer>"
                             : "unrelated words"},
                  {"gt", {{"reference",
                           "the stroma shows dense infiltration"}}}};
    default:
      return json{
          {"task", "seg"},
          {"response", "<think>t</think><answer>[[0,0," +
                           std::to_string(1 + rng() % 8) + ",8]]</answer>"},
          {"gt", {{"mask", {{"size", {8, 8}}, {"rle", {0, 64}}}}}},
          {"image", {{"h", 8}, {"w", 8}}}};
  }
}

Outcome criterion_service() {
  std::mt19937_64 rng(31415);
  std::vector<json> corpus;
  corpus.reserve(1000);
  for (int i = 0; i < 1000; ++i) corpus.push_back(make_request(rng, i));

  std::vector<double> expected;
  expected.reserve(corpus.size());
  for (const json& request : corpus) {
    expected.push_back(handle_score(request)["total"].get<double>());
  }

  ScoreService service(ServiceConfig{"127.0.0.1", 0});
  if (!service.start()) return {false, "cannot start service"};

  httplib::Client client("127.0.0.1", service.port());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto result =
        client.Post("/v1/score", corpus[i].dump(), "application/json");
    if (!result || result->status != 200) {
      service.stop();
      return {false, "request " + std::to_string(i) + " failed"};
    }
    const double total = json::parse(result->body)["total"].get<double>();
    if (total != expected[i]) {
      service.stop();
      return {false, "total mismatch at request " + std::to_string(i)};
    }
  }

  // Concurrent replay: 32 workers, results keyed by request index.
  constexpr int kThreads = 32;
  std::vector<std::thread> workers;
  std::vector<double> concurrent(corpus.size(),
                                 std::numeric_limits<double>::quiet_NaN());
  std::atomic<bool> ok{true};
  for (int t = 0; t < kThreads; ++t) {
    workers.emplace_back([&, t] {
      httplib::Client worker_client("127.0.0.1", service.port());
      for (std::size_t i = t; i < corpus.size(); i += kThreads) {
        const auto result = worker_client.Post(
            "/v1/score", corpus[i].dump(), "application/json");
        if (!result || result->status != 200) {
          ok.store(false);
          return;
        }
        concurrent[i] = json::parse(result->body)["total"].get<double>();
      }
    });
  }
  for (auto& worker : workers) worker.join();
  service.stop();
  if (!ok.load()) return {false, "concurrent request failed"};
  // Same multiset: order-independent comparison.
  std::vector<double> sorted_expected = expected;
  std::vector<double> sorted_concurrent = concurrent;
  std::sort(sorted_expected.begin(), sorted_expected.end());
  std::sort(sorted_concurrent.begin(), sorted_concurrent.end());
  if (sorted_expected != sorted_concurrent) {
    return {false, "concurrent multiset differs"};
  }
  return {true, "1000 sequential + 32-way concurrent replays identical"};
}

// --- 9. end-to-end determinism -------------------------------------------

Outcome criterion_cli_determinism() {
  const std::filesystem::path corpus =
      std::filesystem::path(VRFT_TEST_DATA_DIR) / "eval_corpus_500.jsonl";
  if (!std::filesystem::exists(corpus)) {
    return {false, "shipped corpus missing: " + corpus.string()};
  }
  const std::string out_a = "acceptance_report_a.json";
  const std::string out_b = "acceptance_report_b.json";
  for (const std::string& out : {out_a, out_b}) {
    const std::string command = g_cli_path + " eval --input " +
                                corpus.string() + " --seed 42 --wilcoxon " +
                                "--output " + out + " --table " + out +
                                ".txt 2>/dev/null";
    if (std::system(command.c_str()) != 0) {
      return {false, "cmd_eval failed"};
    }
  }
  const auto read = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  const std::string a = read(out_a);
  const std::string b = read(out_b);
  if (a.empty() || a != b) {
    return {false, "reports differ across identical runs"};
  }
  const std::string table_a = read(out_a + ".txt");
  const std::string table_b = read(out_b + ".txt");
  if (table_a.empty() || table_a != table_b) {
    return {false, "tables differ across identical runs"};
  }
  return {true, std::to_string(a.size()) + " bytes, byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance_tests <path-to-vrft-cli>\n");
    return 2;
  }
  g_cli_path = argv[1];

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 metric-oracle equivalence (1e-12)", criterion_metric_oracles},
      {"2 GRPO advantage/KL math", criterion_grpo_math},
      {"3 analytic gradients vs finite differences", criterion_gradients},
      {"4 toy SFT+GRPO convergence", criterion_toy_convergence},
      {"5 resize planner sweep + pinned cases", criterion_resize},
      {"6 statistics (wilcoxon, bootstrap)", criterion_statistics},
      {"7 reward composition fuzz", criterion_reward_fuzz},
      {"8 service wire equivalence", criterion_service},
      {"9 cmd_eval byte determinism", criterion_cli_determinism},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start)
            .count();
    std::printf("%s criterion %s [%.2fs] %s\n",
                outcome.pass ? "PASS" : "FAIL", criterion.name, seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
