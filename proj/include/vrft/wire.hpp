#ifndef VRFT_WIRE_HPP_
#define VRFT_WIRE_HPP_

#include <optional>
#include <string>

#include "json.hpp"
#include "vrft/response_parser.hpp"
#include "vrft/reward.hpp"

namespace vrft::wire {

// Raised for any schema violation in a wire payload; the message names the
// offending field.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ground-truth wire shapes, one per task:
//   cls        {"label": "A"}
//   det        {"boxes": [[x1,y1,x2,y2], ...]}
//   seg        {"mask": {"size": [h, w], "rle": [run lengths, row-major,
//                                                starting with zeros]}}
//   vqa_closed {"answer": "B"}
//   vqa_open   {"reference": "text"}
GroundTruth ground_truth_from_json(const nlohmann::json& doc, TaskKind task);
nlohmann::json ground_truth_to_json(const GroundTruth& gt);

BinaryMask mask_from_json(const nlohmann::json& doc);
nlohmann::json mask_to_json(const BinaryMask& mask);

ImageDims image_dims_from_json(const nlohmann::json& doc);
nlohmann::json image_dims_to_json(const ImageDims& dims);

nlohmann::json box_to_json(const BoundingBox& box);

}  // namespace vrft::wire

#endif  // VRFT_WIRE_HPP_
