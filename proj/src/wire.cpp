#include "vrft/wire.hpp"

#include <cctype>
#include <vector>

namespace vrft::wire {

namespace {

using nlohmann::json;

const json& require(const json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end()) {
    throw SchemaError(std::string("missing field \"") + field + "\"");
  }
  return *it;
}

double require_number(const json& value, const char* field) {
  if (!value.is_number()) {
    throw SchemaError(std::string("field \"") + field + "\" must be a number");
  }
  return value.get<double>();
}

char parse_letter(const json& value, const char* field) {
  if (!value.is_string()) {
    throw SchemaError(std::string("field \"") + field + "\" must be a string");
  }
  const std::string s = value.get<std::string>();
  if (s.size() != 1 || !std::isalpha(static_cast<unsigned char>(s[0]))) {
    throw SchemaError(std::string("field \"") + field +
                      "\" must be a single letter");
  }
  return static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
}

}  // namespace

BinaryMask mask_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("mask must be an object");
  const json& size = require(doc, "size");
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    throw SchemaError("mask.size must be [height, width]");
  }
  const int h = size[0].get<int>();
  const int w = size[1].get<int>();
  if (h <= 0 || w <= 0) throw SchemaError("mask.size must be positive");
  const json& rle = require(doc, "rle");
  if (!rle.is_array()) throw SchemaError("mask.rle must be an array");
  std::vector<std::uint64_t> runs;
  runs.reserve(rle.size());
  for (const json& run : rle) {
    if (!run.is_number_integer() || run.get<std::int64_t>() < 0) {
      throw SchemaError("mask.rle entries must be non-negative integers");
    }
    runs.push_back(run.get<std::uint64_t>());
  }
  try {
    return BinaryMask::from_rle(h, w, runs);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("mask.rle invalid: ") + e.what());
  }
}

json mask_to_json(const BinaryMask& mask) {
  return json{{"size", {mask.height(), mask.width()}},
              {"rle", mask.to_rle()}};
}

ImageDims image_dims_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("image must be an object");
  const json& h = require(doc, "h");
  const json& w = require(doc, "w");
  if (!h.is_number_integer() || !w.is_number_integer() || h.get<int>() <= 0 ||
      w.get<int>() <= 0) {
    throw SchemaError("image.h and image.w must be positive integers");
  }
  return ImageDims{h.get<int>(), w.get<int>()};
}

json image_dims_to_json(const ImageDims& dims) {
  return json{{"h", dims.height}, {"w", dims.width}};
}

json box_to_json(const BoundingBox& box) {
  return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

GroundTruth ground_truth_from_json(const json& doc, TaskKind task) {
  if (!doc.is_object()) throw SchemaError("gt must be an object");
  switch (task) {
    case TaskKind::Classification:
      return ClsLabel{parse_letter(require(doc, "label"), "gt.label")};
    case TaskKind::Detection: {
      const json& boxes = require(doc, "boxes");
      if (!boxes.is_array()) throw SchemaError("gt.boxes must be an array");
      DetBoxes det;
      for (const json& entry : boxes) {
        if (!entry.is_array() || entry.size() != 4) {
          throw SchemaError("gt.boxes entries must be [x1, y1, x2, y2]");
        }
        BoundingBox box{require_number(entry[0], "gt.boxes"),
                        require_number(entry[1], "gt.boxes"),
                        require_number(entry[2], "gt.boxes"),
                        require_number(entry[3], "gt.boxes")};
        if (!box.valid()) {
          throw SchemaError("gt.boxes entry is degenerate or negative");
        }
        det.boxes.push_back(box);
      }
      return det;
    }
    case TaskKind::Segmentation:
      return SegMask{mask_from_json(require(doc, "mask"))};
    case TaskKind::VqaClosed: {
      const json& answer = require(doc, "answer");
      if (!answer.is_string()) {
        throw SchemaError("gt.answer must be a string");
      }
      return ClosedAnswer{answer.get<std::string>()};
    }
    case TaskKind::VqaOpen: {
      const json& reference = require(doc, "reference");
      if (!reference.is_string()) {
        throw SchemaError("gt.reference must be a string");
      }
      return OpenAnswer{reference.get<std::string>()};
    }
  }
  throw SchemaError("unknown task kind");
}

json ground_truth_to_json(const GroundTruth& gt) {
  if (const auto* cls = std::get_if<ClsLabel>(&gt)) {
    return json{{"label", std::string(1, cls->letter)}};
  }
  if (const auto* det = std::get_if<DetBoxes>(&gt)) {
    json boxes = json::array();
    for (const BoundingBox& box : det->boxes) boxes.push_back(box_to_json(box));
    return json{{"boxes", std::move(boxes)}};
  }
  if (const auto* seg = std::get_if<SegMask>(&gt)) {
    return json{{"mask", mask_to_json(seg->mask)}};
  }
  if (const auto* closed = std::get_if<ClosedAnswer>(&gt)) {
    return json{{"answer", closed->value}};
  }
  const auto& open = std::get<OpenAnswer>(gt);
  return json{{"reference", open.reference}};
}

}  // namespace vrft::wire
