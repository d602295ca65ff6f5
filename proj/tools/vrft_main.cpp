// vrft command-line front end: scoring, evaluation, ranking, resize
// planning, toy training, and the scoring service.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vrft/eval.hpp"
#include "vrft/grpo.hpp"
#include "vrft/image_scaling.hpp"
#include "vrft/service.hpp"
#include "vrft/stats.hpp"
#include "vrft/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

int write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return kExitIo;
  }
  out << content;
  return kExitOk;
}

std::optional<std::string> read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct ScoreArgs {
  std::string task;
  std::string response;
  std::string response_file;
  std::string gt;
  std::string gt_file;
  double lambda = 1.0;
  int image_h = 0;
  int image_w = 0;
};

int run_score(const ScoreArgs& args) {
  std::string response = args.response;
  if (!args.response_file.empty()) {
    const auto content = read_text_file(args.response_file);
    if (!content) {
      std::cerr << "error: cannot read " << args.response_file << "\n";
      return kExitIo;
    }
    response = *content;
  }
  std::string gt_text = args.gt;
  if (!args.gt_file.empty()) {
    const auto content = read_text_file(args.gt_file);
    if (!content) {
      std::cerr << "error: cannot read " << args.gt_file << "\n";
      return kExitIo;
    }
    gt_text = *content;
  }
  json gt;
  try {
    gt = json::parse(gt_text);
  } catch (const json::exception& e) {
    std::cerr << "error: --gt is not valid JSON: " << e.what() << "\n";
    return kExitValidation;
  }
  json request{{"task", args.task},
               {"response", response},
               {"gt", std::move(gt)},
               {"lambda", args.lambda}};
  if (args.image_h > 0 && args.image_w > 0) {
    request["image"] = json{{"h", args.image_h}, {"w", args.image_w}};
  }
  try {
    std::cout << vrft::handle_score(request).dump(2) << "\n";
  } catch (const vrft::RequestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

struct EvalArgs {
  std::string input;
  std::string output;
  std::string table_output;
  bool wilcoxon = false;
  vrft::EvalOptions options;
};

int run_eval(const EvalArgs& args) {
  vrft::IngestResult ingest;
  try {
    ingest = vrft::ingest(args.input);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  for (const vrft::IngestError& error : ingest.errors) {
    std::cerr << "warning: line " << error.line << ": " << error.message
              << "\n";
  }
  if (ingest.records.empty()) {
    std::cerr << "warning: no valid records in " << args.input << "\n";
  }
  const std::vector<vrft::TaskReport> reports =
      vrft::evaluate(ingest.records, args.options);
  std::vector<vrft::WilcoxonEntry> tests;
  if (args.wilcoxon) {
    tests = vrft::pairwise_wilcoxon(ingest.records, args.options);
    for (const vrft::WilcoxonEntry& entry : tests) {
      if (!entry.p_value) {
        std::cerr << "warning: wilcoxon skipped for " << entry.task << " "
                  << entry.model_a << " vs " << entry.model_b << ": "
                  << entry.note << "\n";
      }
    }
  }
  const std::string report =
      vrft::report_to_json(reports, tests, args.options).dump(2) + "\n";
  if (args.output.empty()) {
    std::cout << report;
  } else {
    const int rc = write_text_file(args.output, report);
    if (rc != kExitOk) return rc;
  }
  const std::string table = vrft::report_table(reports);
  if (args.table_output.empty()) {
    std::cerr << table;
  } else {
    const int rc = write_text_file(args.table_output, table);
    if (rc != kExitOk) return rc;
  }
  return kExitOk;
}

struct RankArgs {
  std::vector<std::string> inputs;
  std::string dir;
  std::string output;
  std::string mode = "competition";
};

int run_rank(const RankArgs& args) {
  std::vector<std::string> paths = args.inputs;
  if (!args.dir.empty()) {
    std::error_code ec;
    std::filesystem::directory_iterator it(args.dir, ec);
    if (ec) {
      std::cerr << "error: cannot list " << args.dir << ": " << ec.message()
                << "\n";
      return kExitIo;
    }
    for (const auto& entry : it) {
      if (entry.path().extension() == ".json") {
        paths.push_back(entry.path().string());
      }
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    std::cerr << "error: no report files given\n";
    return kExitValidation;
  }
  std::map<std::string, std::map<std::string, double>> values_by_task;
  for (const std::string& path : paths) {
    const auto content = read_text_file(path);
    if (!content) {
      std::cerr << "error: cannot read " << path << "\n";
      return kExitIo;
    }
    json doc;
    try {
      doc = json::parse(*content);
    } catch (const json::exception& e) {
      std::cerr << "error: " << path << " is not valid JSON: " << e.what()
                << "\n";
      return kExitValidation;
    }
    if (!doc.contains("reports") || !doc["reports"].is_array()) {
      std::cerr << "error: " << path << " has no reports array\n";
      return kExitValidation;
    }
    for (const json& row : doc["reports"]) {
      const std::string task = row.value("task", std::string{});
      const std::string model = row.value("model", std::string{});
      const std::string metric = row.value("metric", std::string{});
      const auto kind = vrft::task_from_name(task);
      if (!kind || model.empty()) continue;
      if (metric == vrft::primary_metric(*kind)) {
        values_by_task[task][model] = row.value("point", 0.0);
      }
    }
  }
  const vrft::RankMode mode = args.mode == "dense"
                                  ? vrft::RankMode::Dense
                                  : vrft::RankMode::Competition;
  const vrft::RankTable table = vrft::rank_models(values_by_task, mode);
  for (const std::string& task : table.skipped_tasks) {
    std::cerr << "warning: task " << task
              << " skipped (missing a model's value)\n";
  }
  const std::string out = vrft::rank_table_to_json(table).dump(2) + "\n";
  if (args.output.empty()) {
    std::cout << out;
  } else {
    const int rc = write_text_file(args.output, out);
    if (rc != kExitOk) return rc;
  }
  std::cerr << vrft::rank_table_text(table);
  return kExitOk;
}

struct ResizeArgs {
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t max_tokens = vrft::kRoiTokenBudget;
  std::int64_t patch = vrft::kDefaultPatch;
};

int run_resize(const ResizeArgs& args) {
  try {
    const vrft::ResizePlan plan =
        vrft::plan_resize(args.h, args.w, args.max_tokens, args.patch);
    std::cout << json{{"input", {{"h", plan.input_height},
                                 {"w", plan.input_width}}},
                      {"output", {{"h", plan.output_height},
                                  {"w", plan.output_width}}},
                      {"patch", plan.patch},
                      {"max_tokens", plan.max_tokens},
                      {"tokens", plan.tokens}}
                     .dump(2)
              << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
};

int run_train_toy(const TrainArgs& args) {
  if (!std::filesystem::exists(args.config)) {
    std::cerr << "error: cannot read " << args.config << "\n";
    return kExitIo;
  }
  vrft::ToyTrainConfig config;
  try {
    config = vrft::load_toy_train_config(args.config);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (args.seed) config.grpo.seed = *args.seed;
  const vrft::ToyTrainResult result = vrft::run_toy_training(config);

  std::ostringstream trajectory;
  for (std::size_t i = 0; i < result.sft_losses.size(); ++i) {
    trajectory << json{{"phase", "sft"},
                       {"step", i},
                       {"loss", result.sft_losses[i]}}
                      .dump()
               << "\n";
  }
  for (std::size_t i = 0; i < result.grpo_steps.size(); ++i) {
    const vrft::StepDiagnostics& diag = result.grpo_steps[i];
    trajectory << json{{"phase", "grpo"},
                       {"step", i},
                       {"mean_reward", diag.mean_reward},
                       {"mean_kl", diag.mean_kl},
                       {"clip_fraction", diag.clip_fraction},
                       {"objective", diag.objective}}
                      .dump()
               << "\n";
  }
  if (!args.output.empty()) {
    const int rc = write_text_file(args.output, trajectory.str());
    if (rc != kExitOk) return rc;
  }
  json summary{{"seed", config.grpo.seed},
               {"iterations", config.grpo.iterations},
               {"final_mean_reward", result.final_mean_reward}};
  if (!result.sft_losses.empty()) {
    summary["sft_initial_loss"] = result.sft_losses.front();
    summary["sft_final_loss"] = result.sft_final_loss;
  }
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

struct ServeArgs {
  std::string address = "127.0.0.1";
  int port = 8080;
};

std::atomic<bool> g_stop{false};

int run_serve(const ServeArgs& args) {
  vrft::ScoreService service(
      vrft::ServiceConfig{args.address, args.port});
  if (!service.start()) {
    std::cerr << "error: cannot bind " << args.address << ":" << args.port
              << "\n";
    return kExitIo;
  }
  std::cerr << "vrft " << vrft::kVersion << " serving on " << args.address
            << ":" << service.port() << "\n";
  std::signal(SIGINT, [](int) { g_stop.store(true); });
  std::signal(SIGTERM, [](int) { g_stop.store(true); });
  while (!g_stop.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  service.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifiable-reward toolkit for structured-output models"};
  app.set_version_flag("--version", vrft::kVersion);
  app.require_subcommand(1);

  ScoreArgs score_args;
  CLI::App* score = app.add_subcommand(
      "score", "Score one response against a ground truth");
  score->add_option("--task", score_args.task,
                    "Task kind: cls|det|seg|vqa_closed|vqa_open")
      ->required();
  score->add_option("--response", score_args.response, "Raw response text");
  score->add_option("--response-file", score_args.response_file,
                    "File holding the raw response");
  score->add_option("--gt", score_args.gt, "Ground truth as JSON");
  score->add_option("--gt-file", score_args.gt_file,
                    "File holding the ground-truth JSON");
  score->add_option("--lambda", score_args.lambda,
                    "Format-reward weight (default 1)");
  score->add_option("--image-h", score_args.image_h,
                    "Image height (segmentation)");
  score->add_option("--image-w", score_args.image_w,
                    "Image width (segmentation)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval", "Evaluate a line-delimited prediction file");
  eval->add_option("--input", eval_args.input, "Input records (JSONL)")
      ->required();
  eval->add_option("--output", eval_args.output,
                   "Report JSON path (default: stdout)");
  eval->add_option("--table", eval_args.table_output,
                   "Human-readable table path (default: stderr)");
  eval->add_option("--seed", eval_args.options.seed,
                   "Bootstrap seed (default 42)");
  eval->add_option("--bootstrap", eval_args.options.bootstrap_samples,
                   "Bootstrap resamples (default 1000)");
  eval->add_flag("--wilcoxon", eval_args.wilcoxon,
                 "Add pairwise Wilcoxon signed-rank tests");

  RankArgs rank_args;
  CLI::App* rank = app.add_subcommand(
      "rank", "Aggregate report files into tied average ranks");
  rank->add_option("inputs", rank_args.inputs, "Report JSON files");
  rank->add_option("--dir", rank_args.dir, "Directory of report JSON files");
  rank->add_option("--mode", rank_args.mode,
                   "Tie handling: competition|dense (default competition)")
      ->check(CLI::IsMember({"competition", "dense"}));
  rank->add_option("--output", rank_args.output,
                   "Rank table JSON path (default: stdout)");

  ResizeArgs resize_args;
  CLI::App* resize = app.add_subcommand(
      "resize", "Plan a patch-aligned resize under a token budget");
  resize->add_option("--h", resize_args.h, "Input height in pixels")
      ->required();
  resize->add_option("--w", resize_args.w, "Input width in pixels")
      ->required();
  resize->add_option("--max-tokens", resize_args.max_tokens,
                     "Token budget (default 256; WSI mode uses 1024)");
  resize->add_option("--patch", resize_args.patch, "Patch size (default 28)");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand(
      "train-toy", "Run SFT then GRPO on a toy categorical policy");
  train->add_option("--config", train_args.config, "Training config (JSON)")
      ->required();
  train->add_option("--output", train_args.output,
                    "Trajectory output path (JSONL)");
  std::uint64_t seed_override = 0;
  CLI::Option* seed_option =
      train->add_option("--seed", seed_override, "Override the config seed");

  ServeArgs serve_args;
  CLI::App* serve = app.add_subcommand(
      "serve", "Run the scoring service");
  serve->add_option("--address", serve_args.address,
                    "Listen address (default 127.0.0.1)")
      ->envname("VRFT_ADDRESS");
  serve->add_option("--port", serve_args.port, "Listen port (default 8080)")
      ->envname("VRFT_PORT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (score->parsed()) {
    if (score_args.response.empty() && score_args.response_file.empty()) {
      std::cerr << "error: provide --response or --response-file\n";
      return kExitValidation;
    }
    if (score_args.gt.empty() && score_args.gt_file.empty()) {
      std::cerr << "error: provide --gt or --gt-file\n";
      return kExitValidation;
    }
    return run_score(score_args);
  }
  if (eval->parsed()) return run_eval(eval_args);
  if (rank->parsed()) return run_rank(rank_args);
  if (resize->parsed()) return run_resize(resize_args);
  if (train->parsed()) {
    if (seed_option->count() > 0) train_args.seed = seed_override;
    return run_train_toy(train_args);
  }
  if (serve->parsed()) return run_serve(serve_args);
  return kExitValidation;
}
