// Generates the synthetic evaluation corpus shipped under tests/data/.
// Three models of decreasing quality answer the same record ids so ranking
// and paired significance tests have something to chew on. Deterministic:
// regenerating always produces the same bytes.

#include <array>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrft/mask.hpp"
#include "vrft/reward.hpp"
#include "vrft/wire.hpp"

namespace {

using nlohmann::json;
using vrft::BoundingBox;

struct ModelProfile {
  const char* name;
  double p_correct;   // option/answer accuracy
  double p_format;    // emits the tagged template
  double box_keep;    // keeps a ground-truth box in its prediction
  double box_jitter;  // max per-edge pixel jitter
  double p_spurious;  // adds a stray box
};

constexpr std::array<ModelProfile, 3> kModels{{
    {"rft-vlm", 0.92, 0.97, 0.95, 2.0, 0.05},
    {"sft-vlm", 0.72, 0.85, 0.80, 8.0, 0.20},
    {"base-vlm", 0.45, 0.55, 0.55, 18.0, 0.40},
}};

constexpr const char* kClassPool[] = {
    "Stroma",        "Tumor",        "Necrosis",   "Lymphocytes",
    "Normal mucosa", "Adenoma",      "Epithelium", "Smooth muscle",
    "Blood vessels", "Inflammation",
};

constexpr const char* kOpenReferences[] = {
    "the tissue shows dense lymphocytic infiltration around the glands",
    "glandular structures are irregular with loss of normal architecture",
    "the stroma contains scattered inflammatory cells and fibrosis",
    "nuclei are enlarged and hyperchromatic with visible mitotic figures",
    "the epithelium appears intact with regular crypt spacing",
    "there is extensive necrosis with surrounding viable tumor tissue",
    "vessels are congested and the interstitium is edematous",
    "the sample shows well differentiated columnar epithelium",
    "tumor cells invade the muscularis propria in small clusters",
};

double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::string wrap(std::mt19937_64& rng, const ModelProfile& model,
                 const std::string& answer) {
  if (uniform(rng) < model.p_format) {
    return "<think>examining the tissue regions</think><answer>" + answer +
           "</answer>";
  }
  return answer;
}

std::string boxes_text(const std::vector<BoundingBox>& boxes) {
  std::string out = "[";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (i > 0) out += ",";
    char buffer[96];
    std::snprintf(buffer, sizeof(buffer), "[%d,%d,%d,%d]",
                  static_cast<int>(boxes[i].x_min),
                  static_cast<int>(boxes[i].y_min),
                  static_cast<int>(boxes[i].x_max),
                  static_cast<int>(boxes[i].y_max));
    out += buffer;
  }
  out += "]";
  return out;
}

std::vector<BoundingBox> random_boxes(std::mt19937_64& rng, int count,
                                      int extent) {
  std::vector<BoundingBox> boxes;
  for (int i = 0; i < count; ++i) {
    const int w = uniform_int(rng, 12, extent / 3);
    const int h = uniform_int(rng, 12, extent / 3);
    const int x = uniform_int(rng, 0, extent - w - 1);
    const int y = uniform_int(rng, 0, extent - h - 1);
    boxes.push_back(BoundingBox{static_cast<double>(x), static_cast<double>(y),
                                static_cast<double>(x + w),
                                static_cast<double>(y + h)});
  }
  return boxes;
}

std::vector<BoundingBox> predict_boxes(std::mt19937_64& rng,
                                       const ModelProfile& model,
                                       const std::vector<BoundingBox>& gts,
                                       int extent) {
  std::vector<BoundingBox> preds;
  for (const BoundingBox& gt : gts) {
    if (uniform(rng) > model.box_keep) continue;
    BoundingBox box = gt;
    const double j = model.box_jitter;
    box.x_min = std::max(0.0, box.x_min + (uniform(rng) * 2.0 - 1.0) * j);
    box.y_min = std::max(0.0, box.y_min + (uniform(rng) * 2.0 - 1.0) * j);
    box.x_max = std::min<double>(extent,
                                 box.x_max + (uniform(rng) * 2.0 - 1.0) * j);
    box.y_max = std::min<double>(extent,
                                 box.y_max + (uniform(rng) * 2.0 - 1.0) * j);
    if (box.valid()) preds.push_back(box);
  }
  if (uniform(rng) < model.p_spurious) {
    for (const BoundingBox& stray : random_boxes(rng, 1, extent)) {
      preds.push_back(stray);
    }
  }
  return preds;
}

json base_record(const std::string& id, const char* task, const char* model,
                 const std::string& prompt, const std::string& response) {
  return json{{"id", id},
              {"task", task},
              {"model", model},
              {"prompt", prompt},
              {"response", response}};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: vrft_gen_corpus <output.jsonl>\n";
    return 1;
  }
  std::ofstream out(argv[1], std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << argv[1] << "\n";
    return 1;
  }

  std::vector<std::string> lines;

  // Classification: 40 shared ids.
  for (int i = 0; i < 40; ++i) {
    std::mt19937_64 task_rng(1000 + i);
    const int base = uniform_int(task_rng, 0, 5);
    std::string prompt =
        "Classify this pathological image into one of these classes: ";
    for (int k = 0; k < 4; ++k) {
      prompt += "(";
      prompt += static_cast<char>('A' + k);
      prompt += ") ";
      prompt += kClassPool[(base + k) % 10];
      prompt += k + 1 < 4 ? ", " : ".";
    }
    const char truth = static_cast<char>('A' + uniform_int(task_rng, 0, 3));
    const std::string id = "cls-" + std::to_string(i);
    for (std::size_t m = 0; m < kModels.size(); ++m) {
      std::mt19937_64 rng(7000 + i * 16 + static_cast<int>(m));
      const ModelProfile& model = kModels[m];
      char predicted = truth;
      if (uniform(rng) >= model.p_correct) {
        predicted = static_cast<char>(
            'A' + (truth - 'A' + uniform_int(rng, 1, 3)) % 4);
      }
      const std::string answer = std::string("(") + predicted + ")";
      json record = base_record(id, "cls", model.name, prompt,
                                wrap(rng, model, answer));
      record["gt"] = json{{"label", std::string(1, truth)}};
      lines.push_back(record.dump());
    }
  }

  // Detection: 30 shared ids on 224x224 images.
  for (int i = 0; i < 30; ++i) {
    std::mt19937_64 task_rng(2000 + i);
    const int extent = 224;
    const auto gts = random_boxes(task_rng, uniform_int(task_rng, 1, 4),
                                  extent);
    const std::string prompt =
        "Detect gland in pathology colon. Output bounding boxes in "
        "[[x_min, y_min, x_max, y_max],...] format.";
    const std::string id = "det-" + std::to_string(i);
    json gt_json = json::array();
    for (const BoundingBox& box : gts) gt_json.push_back(vrft::wire::box_to_json(box));
    for (std::size_t m = 0; m < kModels.size(); ++m) {
      std::mt19937_64 rng(8000 + i * 16 + static_cast<int>(m));
      const ModelProfile& model = kModels[m];
      const auto preds = predict_boxes(rng, model, gts, extent);
      json record = base_record(id, "det", model.name, prompt,
                                wrap(rng, model, boxes_text(preds)));
      record["gt"] = json{{"boxes", gt_json}};
      lines.push_back(record.dump());
    }
  }

  // Segmentation: 30 shared ids on 64x64 images; masks are box unions.
  for (int i = 0; i < 30; ++i) {
    std::mt19937_64 task_rng(3000 + i);
    const int extent = 64;
    const auto gts = random_boxes(task_rng, uniform_int(task_rng, 1, 2),
                                  extent);
    const vrft::ImageDims dims{extent, extent};
    const vrft::BinaryMask gt_mask = vrft::rasterize_boxes(dims, gts);
    const std::string prompt =
        "Segment gland in pathology colon. Output bounding boxes in "
        "[[x_min, y_min, x_max, y_max],...] format.";
    const std::string id = "seg-" + std::to_string(i);
    for (std::size_t m = 0; m < kModels.size(); ++m) {
      std::mt19937_64 rng(9000 + i * 16 + static_cast<int>(m));
      const ModelProfile& model = kModels[m];
      const auto preds = predict_boxes(rng, model, gts, extent);
      json record = base_record(id, "seg", model.name, prompt,
                                wrap(rng, model, boxes_text(preds)));
      record["gt"] = json{{"mask", vrft::wire::mask_to_json(gt_mask)}};
      record["image"] = vrft::wire::image_dims_to_json(dims);
      lines.push_back(record.dump());
    }
  }

  // Closed VQA: 30 shared ids, alternating lettered and yes/no style.
  for (int i = 0; i < 30; ++i) {
    std::mt19937_64 task_rng(4000 + i);
    const bool lettered = i % 2 == 0;
    const std::string id = "vqc-" + std::to_string(i);
    std::string prompt;
    std::string truth;
    if (lettered) {
      const int pool = uniform_int(task_rng, 0, 7);
      prompt = "Which tissue type dominates this image? (A) " +
               std::string(kClassPool[pool]) + " (B) " +
               std::string(kClassPool[(pool + 3) % 10]);
      truth = uniform(task_rng) < 0.5 ? "A" : "B";
    } else {
      prompt = "Is tumor tissue present in this image?";
      truth = uniform(task_rng) < 0.5 ? "yes" : "no";
    }
    for (std::size_t m = 0; m < kModels.size(); ++m) {
      std::mt19937_64 rng(10000 + i * 16 + static_cast<int>(m));
      const ModelProfile& model = kModels[m];
      std::string answer;
      if (uniform(rng) < model.p_correct) {
        answer = lettered ? "(" + truth + ")" : truth;
      } else {
        answer = lettered ? (truth == "A" ? "(B)" : "(A)")
                          : (truth == "yes" ? "no" : "yes");
      }
      json record = base_record(id, "vqa_closed", model.name, prompt,
                                wrap(rng, model, answer));
      record["gt"] = json{{"answer", truth}};
      lines.push_back(record.dump());
    }
  }

  // Open VQA: 36 shared ids plus 2 extras answered by the top model only,
  // bringing the corpus to exactly 500 records.
  for (int i = 0; i < 38; ++i) {
    std::mt19937_64 task_rng(5000 + i);
    const std::string reference = kOpenReferences[i % 9];
    const std::string prompt = "Describe the dominant tissue pattern.";
    const std::string id = "vqo-" + std::to_string(i);
    const std::size_t model_count = i < 36 ? kModels.size() : 1;
    for (std::size_t m = 0; m < model_count; ++m) {
      std::mt19937_64 rng(11000 + i * 16 + static_cast<int>(m));
      const ModelProfile& model = kModels[m];
      std::string answer;
      const double quality = uniform(rng);
      if (quality < model.p_correct) {
        answer = reference;
      } else if (quality < model.p_correct + 0.25) {
        // Keep roughly the first two thirds of the reference.
        const std::size_t cut = reference.size() * 2 / 3;
        const std::size_t space = reference.rfind(' ', cut);
        answer = reference.substr(
            0, space == std::string::npos ? cut : space);
      } else {
        answer = "the image appears unremarkable";
      }
      json record = base_record(id, "vqa_open", model.name, prompt,
                                wrap(rng, model, answer));
      record["gt"] = json{{"reference", reference}};
      lines.push_back(record.dump());
    }
  }

  for (const std::string& line : lines) {
    out << line << "\n";
  }
  std::cerr << "wrote " << lines.size() << " records\n";
  return 0;
}
