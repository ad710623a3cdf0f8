#pragma once

#include <string>
#include <string_view>

namespace dki::prompt {

inline constexpr std::string_view kUnknown = "UNKNOWN";

enum class AnswerStatus {
  ok,
  no_json_found,
  multiple_json_objects,
  invalid_json,
  missing_key,
  extra_key,
  non_string_value,
};

std::string_view to_string(AnswerStatus status) noexcept;

// Parse failures are carried in `status`, never thrown.
struct ProbeAnswer {
  AnswerStatus status = AnswerStatus::no_json_found;
  std::string cue;
  std::string earliest;
  std::string latest;
  std::string raw;
  bool surrounding_text = false;  // prose or fences around the object
  std::string detail;

  bool ok() const noexcept { return status == AnswerStatus::ok; }
};

ProbeAnswer parse_answer(std::string_view raw);

// {"cue":"...", "earliest":"...","latest":"..."} with JSON escaping.
std::string format_answer(std::string_view cue, std::string_view earliest, std::string_view latest);

}  // namespace dki::prompt
