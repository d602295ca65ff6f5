#include "vrft/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vrft/wire.hpp"

namespace vrft {

namespace {

using nlohmann::json;

// FNV-1a, used to derive one bootstrap substream per report group so
// evaluation order can never change the resamples a group sees.
std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t group_seed(std::uint64_t master, std::string_view task,
                         std::string_view model) {
  std::string key;
  key.reserve(task.size() + model.size() + 1);
  key.append(task);
  key.push_back('\x1f');
  key.append(model);
  return splitmix64(master ^ fnv1a(key));
}

}  // namespace

IngestResult ingest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open input file: " + path.string());
  }
  return ingest_stream(in);
}

IngestResult ingest_stream(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;  // blank line
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      result.errors.push_back({line_number,
                               std::string("invalid JSON: ") + e.what()});
      continue;
    }
    try {
      if (!doc.is_object()) throw wire::SchemaError("record must be an object");
      TaskRecord record;
      record.id = doc.value("id", std::string{});
      if (record.id.empty()) throw wire::SchemaError("missing field \"id\"");
      const std::string task_string = doc.value("task", std::string{});
      const auto task = task_from_name(task_string);
      if (!task) {
        throw wire::SchemaError("unknown task \"" + task_string + "\"");
      }
      record.task = *task;
      record.model = doc.value("model", std::string{});
      if (record.model.empty()) {
        throw wire::SchemaError("missing field \"model\"");
      }
      record.prompt = doc.value("prompt", std::string{});
      if (!doc.contains("response") || !doc["response"].is_string()) {
        throw wire::SchemaError("missing field \"response\"");
      }
      record.response = doc["response"].get<std::string>();
      if (!doc.contains("gt")) throw wire::SchemaError("missing field \"gt\"");
      record.gt = wire::ground_truth_from_json(doc["gt"], record.task);
      if (doc.contains("image")) {
        record.image = wire::image_dims_from_json(doc["image"]);
      }
      if (record.task == TaskKind::Segmentation) {
        if (!record.image) {
          throw wire::SchemaError("segmentation records need \"image\"");
        }
        const auto& mask = std::get<SegMask>(record.gt).mask;
        if (mask.height() != record.image->height ||
            mask.width() != record.image->width) {
          throw wire::SchemaError("mask size disagrees with image dims");
        }
      }
      result.records.push_back(std::move(record));
    } catch (const wire::SchemaError& e) {
      result.errors.push_back({line_number, e.what()});
    }
  }
  return result;
}

const char* primary_metric(TaskKind task) {
  switch (task) {
    case TaskKind::Classification: return "ACC";
    case TaskKind::Detection: return "AP50";
    case TaskKind::Segmentation: return "Dice";
    case TaskKind::VqaClosed: return "ACC";
    case TaskKind::VqaOpen: return "BLEU4";
  }
  return "ACC";
}

namespace {

std::optional<char> extract_for_record(const TaskRecord& record,
                                       std::string_view answer) {
  std::vector<Option> options = parse_options(record.prompt);
  if (options.empty()) options = alphabet_options();
  return extract_option(answer, options);
}

// Scalar value a record contributes to paired significance testing.
double record_value(const TaskRecord& record) {
  const ParsedResponse parsed = parse_response(record.response);
  const std::string_view answer =
      parsed.answer ? std::string_view(*parsed.answer) : std::string_view{};
  switch (record.task) {
    case TaskKind::Classification: {
      const auto extracted = extract_for_record(record, answer);
      const char truth = std::get<ClsLabel>(record.gt).letter;
      return (extracted && *extracted == truth) ? 1.0 : 0.0;
    }
    case TaskKind::Detection:
      return average_precision(parse_boxes(answer),
                               std::get<DetBoxes>(record.gt).boxes, 0.5);
    case TaskKind::Segmentation: {
      const auto& gt_mask = std::get<SegMask>(record.gt).mask;
      const BinaryMask predicted = rasterize_boxes(
          *record.image, parse_boxes(answer));
      return dice(predicted, gt_mask);
    }
    case TaskKind::VqaClosed: {
      const ClosedAnswer& truth = std::get<ClosedAnswer>(record.gt);
      static const std::vector<Option> alphabet = alphabet_options();
      std::vector<Option> options = parse_options(record.prompt);
      const RewardBreakdown breakdown = reward_vqa_closed(
          parsed, truth,
          options.empty() ? std::span<const Option>(alphabet)
                          : std::span<const Option>(options),
          RewardConfig{});
      return breakdown.r_task;
    }
    case TaskKind::VqaOpen:
      return bleu4(answer, std::get<OpenAnswer>(record.gt).reference).score;
  }
  return 0.0;
}

// Pooled AP over a multiset of records: per-record match flags are
// concatenated in resample order into one ranked list over the summed
// ground-truth count.
double pooled_ap(std::span<const DetectionMatch> matches,
                 std::span<const std::size_t> indices) {
  DetectionMatch pooled;
  for (std::size_t idx : indices) {
    const DetectionMatch& m = matches[idx];
    pooled.num_gt += m.num_gt;
    pooled.is_tp.insert(pooled.is_tp.end(), m.is_tp.begin(), m.is_tp.end());
  }
  if (pooled.num_gt == 0) {
    return pooled.is_tp.empty() ? 1.0 : 0.0;
  }
  if (pooled.is_tp.empty()) return 0.0;
  return ap_from_curve(pr_curve(pooled));
}

}  // namespace

std::vector<TaskReport> evaluate(std::span<const TaskRecord> records,
                                 const EvalOptions& options) {
  // Deterministic grouping: (task, model) keys in sorted order.
  std::map<std::pair<std::string, std::string>, std::vector<const TaskRecord*>>
      groups;
  for (const TaskRecord& record : records) {
    groups[{task_name(record.task), record.model}].push_back(&record);
  }

  std::vector<TaskReport> reports;
  for (const auto& [key, group] : groups) {
    const auto& [task_string, model] = key;
    const TaskKind task = *task_from_name(task_string);
    const std::size_t n = group.size();
    const std::uint64_t seed =
        group_seed(options.seed, task_string, model);

    // Per-record scalar values (every task kind has one).
    std::vector<double> values;
    values.reserve(n);
    for (const TaskRecord* record : group) {
      values.push_back(record_value(*record));
    }

    auto push_report = [&](const char* metric, const BootstrapCi& ci) {
      reports.push_back(TaskReport{task_string, model, metric, ci.point,
                                   ci.lo, ci.hi, n});
    };

    switch (task) {
      case TaskKind::Classification: {
        push_report("ACC", bootstrap_mean_ci(values, options.bootstrap_samples,
                                             seed, options.ci_level));
        // Class universe: prompt options + ground truths + extractions.
        std::set<char> classes;
        std::vector<std::optional<char>> extracted;
        for (const TaskRecord* record : group) {
          for (const Option& option : parse_options(record->prompt)) {
            classes.insert(option.letter);
          }
          classes.insert(std::get<ClsLabel>(record->gt).letter);
          const ParsedResponse parsed = parse_response(record->response);
          const std::string_view answer =
              parsed.answer ? std::string_view(*parsed.answer)
                            : std::string_view{};
          extracted.push_back(extract_for_record(*record, answer));
          if (extracted.back()) classes.insert(*extracted.back());
        }
        const std::vector<char> class_list(classes.begin(), classes.end());
        auto class_index = [&](char letter) {
          return static_cast<int>(
              std::find(class_list.begin(), class_list.end(), letter) -
              class_list.begin());
        };
        std::vector<int> gts;
        std::vector<int> preds;
        for (std::size_t i = 0; i < group.size(); ++i) {
          gts.push_back(class_index(std::get<ClsLabel>(group[i]->gt).letter));
          preds.push_back(extracted[i] ? class_index(*extracted[i]) : -1);
        }
        std::vector<int> gt_scratch(n);
        std::vector<int> pred_scratch(n);
        const auto f1_stat = [&](std::span<const std::size_t> idx) {
          for (std::size_t i = 0; i < idx.size(); ++i) {
            gt_scratch[i] = gts[idx[i]];
            pred_scratch[i] = preds[idx[i]];
          }
          return f1_multiclass(gt_scratch, pred_scratch,
                               static_cast<int>(class_list.size()),
                               options.f1_averaging);
        };
        push_report("F1", bootstrap_ci(n, f1_stat, options.bootstrap_samples,
                                       seed, options.ci_level));
        break;
      }
      case TaskKind::Detection: {
        for (const double threshold : {0.3, 0.5, 0.7}) {
          std::vector<DetectionMatch> matches;
          matches.reserve(n);
          for (const TaskRecord* record : group) {
            const ParsedResponse parsed = parse_response(record->response);
            const std::string_view answer =
                parsed.answer ? std::string_view(*parsed.answer)
                              : std::string_view{};
            matches.push_back(match_detections(
                parse_boxes(answer), std::get<DetBoxes>(record->gt).boxes,
                threshold));
          }
          const auto ap_stat = [&](std::span<const std::size_t> idx) {
            return pooled_ap(matches, idx);
          };
          const char* metric = threshold == 0.3   ? "AP30"
                               : threshold == 0.5 ? "AP50"
                                                  : "AP70";
          push_report(metric, bootstrap_ci(n, ap_stat,
                                           options.bootstrap_samples, seed,
                                           options.ci_level));
        }
        break;
      }
      case TaskKind::Segmentation:
        push_report("Dice",
                    bootstrap_mean_ci(values, options.bootstrap_samples, seed,
                                      options.ci_level));
        break;
      case TaskKind::VqaClosed:
        push_report("ACC", bootstrap_mean_ci(values, options.bootstrap_samples,
                                             seed, options.ci_level));
        break;
      case TaskKind::VqaOpen:
        push_report("BLEU4",
                    bootstrap_mean_ci(values, options.bootstrap_samples, seed,
                                      options.ci_level));
        break;
    }
  }
  return reports;
}

std::vector<WilcoxonEntry> pairwise_wilcoxon(
    std::span<const TaskRecord> records, const EvalOptions& options) {
  (void)options;
  // task -> model -> id -> value
  std::map<std::string, std::map<std::string, std::map<std::string, double>>>
      by_task;
  for (const TaskRecord& record : records) {
    by_task[task_name(record.task)][record.model][record.id] =
        record_value(record);
  }
  std::vector<WilcoxonEntry> entries;
  for (const auto& [task, by_model] : by_task) {
    std::vector<std::string> models;
    for (const auto& [model, _] : by_model) models.push_back(model);
    for (std::size_t i = 0; i < models.size(); ++i) {
      for (std::size_t j = i + 1; j < models.size(); ++j) {
        const auto& values_a = by_model.at(models[i]);
        const auto& values_b = by_model.at(models[j]);
        std::vector<double> a;
        std::vector<double> b;
        for (const auto& [id, value] : values_a) {
          const auto it = values_b.find(id);
          if (it != values_b.end()) {
            a.push_back(value);
            b.push_back(it->second);
          }
        }
        WilcoxonEntry entry;
        entry.task = task;
        entry.model_a = models[i];
        entry.model_b = models[j];
        entry.n_pairs = a.size();
        try {
          entry.p_value = wilcoxon_signed_rank(a, b);
        } catch (const std::invalid_argument& e) {
          entry.note = e.what();
        }
        entries.push_back(std::move(entry));
      }
    }
  }
  return entries;
}

nlohmann::json report_to_json(std::span<const TaskReport> reports,
                              std::span<const WilcoxonEntry> wilcoxon,
                              const EvalOptions& options) {
  json doc;
  doc["bootstrap_samples"] = options.bootstrap_samples;
  doc["seed"] = options.seed;
  doc["ci_level"] = options.ci_level;
  json rows = json::array();
  for (const TaskReport& report : reports) {
    rows.push_back(json{{"task", report.task},
                        {"model", report.model},
                        {"metric", report.metric},
                        {"point", report.point},
                        {"ci_low", report.ci_low},
                        {"ci_high", report.ci_high},
                        {"n", report.n}});
  }
  doc["reports"] = std::move(rows);
  if (!wilcoxon.empty()) {
    json tests = json::array();
    for (const WilcoxonEntry& entry : wilcoxon) {
      json row{{"task", entry.task},
               {"model_a", entry.model_a},
               {"model_b", entry.model_b},
               {"n_pairs", entry.n_pairs}};
      if (entry.p_value) {
        row["p_value"] = *entry.p_value;
      } else {
        row["skipped"] = entry.note;
      }
      tests.push_back(std::move(row));
    }
    doc["wilcoxon"] = std::move(tests);
  }
  return doc;
}

std::string report_table(std::span<const TaskReport> reports) {
  std::ostringstream out;
  out << "task        model             metric  point     ci_low    ci_high   n\n";
  char buffer[160];
  for (const TaskReport& report : reports) {
    std::snprintf(buffer, sizeof(buffer),
                  "%-11s %-17s %-7s %-9.4f %-9.4f %-9.4f %zu\n",
                  report.task.c_str(), report.model.c_str(),
                  report.metric.c_str(), report.point, report.ci_low,
                  report.ci_high, report.n);
    out << buffer;
  }
  return out.str();
}

nlohmann::json rank_table_to_json(const RankTable& table) {
  json doc;
  doc["models"] = table.models;
  doc["tasks"] = table.tasks;
  json ranks = json::array();
  for (std::size_t t = 0; t < table.tasks.size(); ++t) {
    json row;
    row["task"] = table.tasks[t];
    json per_model;
    for (std::size_t m = 0; m < table.models.size(); ++m) {
      per_model[table.models[m]] = table.ranks[t][m];
    }
    row["ranks"] = std::move(per_model);
    ranks.push_back(std::move(row));
  }
  doc["task_ranks"] = std::move(ranks);
  json averages;
  for (std::size_t m = 0; m < table.models.size(); ++m) {
    averages[table.models[m]] = table.average_rank[m];
  }
  doc["average_rank"] = std::move(averages);
  if (!table.skipped_tasks.empty()) doc["skipped_tasks"] = table.skipped_tasks;
  return doc;
}

std::string rank_table_text(const RankTable& table) {
  std::ostringstream out;
  out << "model             average_rank\n";
  char buffer[96];
  for (std::size_t m = 0; m < table.models.size(); ++m) {
    std::snprintf(buffer, sizeof(buffer), "%-17s %.4f\n",
                  table.models[m].c_str(), table.average_rank[m]);
    out << buffer;
  }
  return out.str();
}

}  // namespace vrft
