#ifndef VRFT_RESPONSE_PARSER_HPP_
#define VRFT_RESPONSE_PARSER_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vrft {

// Decomposition of a raw model response into the tagged reasoning/answer
// protocol. format_ok holds only for the strict template: optional
// whitespace, exactly one <think>...</think> block, optional whitespace,
// exactly one <answer>...</answer> block, optional whitespace, and no other
// text. Duplicated or nested tags fail the check. When the template is
// broken, `answer` falls back to the full text with all tag tokens removed
// (trimmed; absent when nothing remains) so task scoring can still attempt
// extraction.
struct ParsedResponse {
  std::optional<std::string> think;
  std::optional<std::string> answer;
  bool format_ok = false;
};

enum class TaskKind {
  Classification,
  Detection,
  Segmentation,
  VqaClosed,
  VqaOpen,
};

// Axis-aligned box in pixel coordinates. Valid boxes have non-negative
// coordinates and strictly positive extent on both axes.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool valid() const {
    return x_min >= 0.0 && y_min >= 0.0 && x_min < x_max && y_min < y_max;
  }
};

// One multiple-choice option: a label letter (A..Z) and its display text
// (may be empty when only the letter is known).
struct Option {
  char letter = '\0';
  std::string text;
};

ParsedResponse parse_response(std::string_view text);

// Extracts the first well-formed [[x_min, y_min, x_max, y_max], ...] list
// from an answer. Entries with the wrong arity, negative coordinates, or a
// non-positive extent are dropped individually; an answer without any
// bracketed list yields an empty vector (zero predictions, not an error).
std::vector<BoundingBox> parse_boxes(std::string_view answer);

// Maps a free-form answer to an option label. Rules, in priority order:
//   1. first parenthesized single letter "(X)" naming an option,
//   2. a leading standalone letter — "X.", "X)", or the whole answer "X",
//   3. case-insensitive match of the whole answer against an option text.
// Returns nullopt when no rule fires (scored as incorrect downstream).
std::optional<char> extract_option(std::string_view answer,
                                   std::span<const Option> options);

// Deterministic prompt routing by template prefix: classification,
// detection, and segmentation prompts are recognized by their leading
// words; anything else is VQA, closed-ended iff the prompt embeds lettered
// options "(A) ... (B) ...".
TaskKind route_task(std::string_view prompt);

// Pulls the embedded option list "(A) text, (B) text, ..." out of a prompt.
// Collection stops at the first repeated letter; prompts without lettered
// options yield an empty vector.
std::vector<Option> parse_options(std::string_view prompt);

// All 26 letters with empty texts; the fallback option set when a caller
// has no prompt to mine.
std::vector<Option> alphabet_options();

const char* task_name(TaskKind kind);
std::optional<TaskKind> task_from_name(std::string_view name);

}  // namespace vrft

#endif  // VRFT_RESPONSE_PARSER_HPP_
