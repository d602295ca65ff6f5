#ifndef VRFT_EVAL_HPP_
#define VRFT_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrft/metrics.hpp"
#include "vrft/response_parser.hpp"
#include "vrft/reward.hpp"
#include "vrft/stats.hpp"

namespace vrft {

// One prediction/ground-truth record from the line-delimited input format.
struct TaskRecord {
  std::string id;
  TaskKind task = TaskKind::VqaOpen;
  std::string model;
  std::string prompt;
  std::string response;
  GroundTruth gt;
  std::optional<ImageDims> image;  // required for segmentation
};

struct IngestError {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<TaskRecord> records;
  std::vector<IngestError> errors;
};

// Parses one JSON object per line. Malformed lines become soft errors with
// their line number; an unreadable path throws std::runtime_error.
IngestResult ingest(const std::filesystem::path& path);
IngestResult ingest_stream(std::istream& in);

// Point estimate with a percentile-bootstrap confidence interval for one
// (task, model, metric) group.
struct TaskReport {
  std::string task;
  std::string model;
  std::string metric;  // ACC | F1 | AP30 | AP50 | AP70 | Dice | BLEU4
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

struct EvalOptions {
  int bootstrap_samples = 1000;
  std::uint64_t seed = 42;
  double ci_level = 0.95;
  F1Averaging f1_averaging = F1Averaging::Macro;
};

// Groups records by (task, model) and reports every metric the task kind
// carries. Detection groups pool predictions across records (matched within
// their own record) into a single ranked list; classification accuracy, Dice,
// and BLEU-4 aggregate per-record values. Bootstrap resampling is at record
// level with one independently seeded substream per group.
std::vector<TaskReport> evaluate(std::span<const TaskRecord> records,
                                 const EvalOptions& options = {});

// Paired two-sided Wilcoxon tests between every model pair within a task,
// pairing records by id. Pairs with fewer than five usable (non-tied)
// differences are reported as skipped rather than failing the run.
struct WilcoxonEntry {
  std::string task;
  std::string model_a;
  std::string model_b;
  std::optional<double> p_value;  // absent when skipped
  std::size_t n_pairs = 0;        // paired records before zero-drop
  std::string note;               // reason when skipped
};

std::vector<WilcoxonEntry> pairwise_wilcoxon(std::span<const TaskRecord> records,
                                             const EvalOptions& options = {});

// The metric a task kind is ranked on.
const char* primary_metric(TaskKind task);

nlohmann::json report_to_json(std::span<const TaskReport> reports,
                              std::span<const WilcoxonEntry> wilcoxon,
                              const EvalOptions& options);
std::string report_table(std::span<const TaskReport> reports);

nlohmann::json rank_table_to_json(const RankTable& table);
std::string rank_table_text(const RankTable& table);

}  // namespace vrft

#endif  // VRFT_EVAL_HPP_
