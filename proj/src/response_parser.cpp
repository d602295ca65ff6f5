#include "vrft/response_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstddef>

namespace vrft {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_alpha(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

char upper(char c) {
  return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool whitespace_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(), is_space);
}

std::size_t count_occurrences(std::string_view text, std::string_view token) {
  std::size_t count = 0;
  std::size_t pos = text.find(token);
  while (pos != std::string_view::npos) {
    ++count;
    pos = text.find(token, pos + token.size());
  }
  return count;
}

std::string strip_tokens(std::string_view text) {
  static constexpr std::array<std::string_view, 4> tokens = {
      kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose};
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    for (std::string_view token : tokens) {
      if (text.compare(i, token.size(), token) == 0) {
        i += token.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(),
                    [](char x, char y) { return upper(x) == upper(y); });
}

bool has_letter(std::span<const Option> options, char letter) {
  return std::any_of(options.begin(), options.end(),
                     [letter](const Option& o) { return o.letter == letter; });
}

}  // namespace

ParsedResponse parse_response(std::string_view text) {
  if (count_occurrences(text, kThinkOpen) == 1 &&
      count_occurrences(text, kThinkClose) == 1 &&
      count_occurrences(text, kAnswerOpen) == 1 &&
      count_occurrences(text, kAnswerClose) == 1) {
    const std::size_t think_open = text.find(kThinkOpen);
    const std::size_t think_close = text.find(kThinkClose);
    const std::size_t answer_open = text.find(kAnswerOpen);
    const std::size_t answer_close = text.find(kAnswerClose);
    const bool ordered = think_open < think_close &&
                         think_close < answer_open &&
                         answer_open < answer_close;
    if (ordered &&
        whitespace_only(text.substr(0, think_open)) &&
        whitespace_only(text.substr(think_close + kThinkClose.size(),
                                    answer_open -
                                        (think_close + kThinkClose.size()))) &&
        whitespace_only(text.substr(answer_close + kAnswerClose.size()))) {
      ParsedResponse parsed;
      parsed.think = std::string(
          trim(text.substr(think_open + kThinkOpen.size(),
                           think_close - (think_open + kThinkOpen.size()))));
      parsed.answer = std::string(
          trim(text.substr(answer_open + kAnswerOpen.size(),
                           answer_close - (answer_open + kAnswerOpen.size()))));
      parsed.format_ok = true;
      return parsed;
    }
  }

  ParsedResponse parsed;
  parsed.format_ok = false;
  const std::string stripped = strip_tokens(text);
  const std::string_view remainder = trim(stripped);
  if (!remainder.empty()) {
    parsed.answer = std::string(remainder);
  }
  return parsed;
}

namespace {

void skip_spaces(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && is_space(text[pos])) ++pos;
}

bool parse_number(std::string_view text, std::size_t& pos, double& out) {
  skip_spaces(text, pos);
  const char* begin = text.data() + pos;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr == begin) return false;
  pos += static_cast<std::size_t>(ptr - begin);
  return true;
}

// Inner group "[n, n, ...]". Returns the parsed numbers; arity is checked by
// the caller so wrong-arity groups can be dropped without failing the list.
bool parse_number_group(std::string_view text, std::size_t& pos,
                        std::vector<double>& numbers) {
  numbers.clear();
  if (pos >= text.size() || text[pos] != '[') return false;
  ++pos;
  skip_spaces(text, pos);
  if (pos < text.size() && text[pos] == ']') {
    ++pos;
    return true;
  }
  while (true) {
    double value = 0.0;
    if (!parse_number(text, pos, value)) return false;
    numbers.push_back(value);
    skip_spaces(text, pos);
    if (pos >= text.size()) return false;
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    if (text[pos] == ']') {
      ++pos;
      return true;
    }
    return false;
  }
}

// Outer list "[group, group, ...]" starting at `pos` (which must point at
// '['). Elements may also be bare numbers; those are dropped as wrong-arity
// entries. Succeeds only when the bracket/comma structure is balanced and at
// least one element is a bracketed group.
bool parse_box_list(std::string_view text, std::size_t pos,
                    std::vector<BoundingBox>& boxes) {
  boxes.clear();
  bool saw_group = false;
  ++pos;  // consume '['
  skip_spaces(text, pos);
  if (pos < text.size() && text[pos] == ']') return false;  // nothing inside
  while (true) {
    skip_spaces(text, pos);
    if (pos >= text.size()) return false;
    if (text[pos] == '[') {
      std::vector<double> numbers;
      if (!parse_number_group(text, pos, numbers)) return false;
      saw_group = true;
      if (numbers.size() == 4) {
        const BoundingBox box{numbers[0], numbers[1], numbers[2], numbers[3]};
        if (box.valid()) boxes.push_back(box);
      }
    } else {
      double ignored = 0.0;
      if (!parse_number(text, pos, ignored)) return false;
    }
    skip_spaces(text, pos);
    if (pos >= text.size()) return false;
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    if (text[pos] == ']') {
      return saw_group;
    }
    return false;
  }
}

}  // namespace

std::vector<BoundingBox> parse_boxes(std::string_view answer) {
  for (std::size_t i = 0; i < answer.size(); ++i) {
    if (answer[i] != '[') continue;
    std::vector<BoundingBox> boxes;
    if (parse_box_list(answer, i, boxes)) {
      return boxes;
    }
  }
  return {};
}

std::optional<char> extract_option(std::string_view answer,
                                   std::span<const Option> options) {
  const std::string_view a = trim(answer);
  if (a.empty() || options.empty()) return std::nullopt;

  // Rule 1: first parenthesized single letter that names an option.
  for (std::size_t i = 0; i + 2 < a.size(); ++i) {
    if (a[i] == '(' && is_alpha(a[i + 1]) && a[i + 2] == ')') {
      const char letter = upper(a[i + 1]);
      if (has_letter(options, letter)) return letter;
    }
  }

  // Rule 2: leading standalone letter — "X.", "X)", or just "X".
  if (is_alpha(a[0])) {
    const char letter = upper(a[0]);
    const bool standalone =
        a.size() == 1 || a[1] == '.' || a[1] == ')';
    if (standalone && has_letter(options, letter)) return letter;
  }

  // Rule 3: whole answer equals an option text.
  for (const Option& option : options) {
    if (!option.text.empty() && iequals(trim(option.text), a)) {
      return option.letter;
    }
  }
  return std::nullopt;
}

TaskKind route_task(std::string_view prompt) {
  std::string_view p = prompt;
  while (!p.empty() && is_space(p.front())) p.remove_prefix(1);
  if (p.starts_with("Classify this pathological image")) {
    return TaskKind::Classification;
  }
  if (p.starts_with("Detect")) return TaskKind::Detection;
  if (p.starts_with("Segment")) return TaskKind::Segmentation;
  const std::size_t first = p.find("(A)");
  if (first != std::string_view::npos &&
      p.find("(B)", first + 3) != std::string_view::npos) {
    return TaskKind::VqaClosed;
  }
  return TaskKind::VqaOpen;
}

std::vector<Option> parse_options(std::string_view prompt) {
  std::vector<Option> options;
  std::vector<std::size_t> starts;  // position just past each "(X)"
  std::size_t stop = prompt.size();
  for (std::size_t i = 0; i + 2 < prompt.size(); ++i) {
    if (prompt[i] == '(' && is_alpha(prompt[i + 1]) && prompt[i + 2] == ')') {
      const char letter = upper(prompt[i + 1]);
      if (has_letter(options, letter)) {  // repeated letter ends the list
        stop = i;
        break;
      }
      options.push_back(Option{letter, {}});
      starts.push_back(i + 3);
      i += 2;
    }
  }
  for (std::size_t k = 0; k < options.size(); ++k) {
    const std::size_t begin = starts[k];
    const std::size_t end =
        k + 1 < options.size() ? starts[k + 1] - 3 : stop;
    std::string_view text = trim(prompt.substr(begin, end - begin));
    if (!text.empty() &&
        (text.back() == ',' || text.back() == '.' || text.back() == ';' ||
         text.back() == '?')) {
      text = trim(text.substr(0, text.size() - 1));
    }
    options[k].text = std::string(text);
  }
  return options;
}

std::vector<Option> alphabet_options() {
  std::vector<Option> options;
  options.reserve(26);
  for (char c = 'A'; c <= 'Z'; ++c) {
    options.push_back(Option{c, {}});
  }
  return options;
}

const char* task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Classification: return "cls";
    case TaskKind::Detection: return "det";
    case TaskKind::Segmentation: return "seg";
    case TaskKind::VqaClosed: return "vqa_closed";
    case TaskKind::VqaOpen: return "vqa_open";
  }
  return "unknown";
}

std::optional<TaskKind> task_from_name(std::string_view name) {
  if (name == "cls") return TaskKind::Classification;
  if (name == "det") return TaskKind::Detection;
  if (name == "seg") return TaskKind::Segmentation;
  if (name == "vqa_closed") return TaskKind::VqaClosed;
  if (name == "vqa_open") return TaskKind::VqaOpen;
  return std::nullopt;
}

}  // namespace vrft
