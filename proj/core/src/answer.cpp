#include "dki/prompting/answer.hpp"

#include <vector>

#include <json.hpp>

namespace dki::prompt {

std::string_view to_string(AnswerStatus status) noexcept {
  switch (status) {
    case AnswerStatus::ok: return "ok";
    case AnswerStatus::no_json_found: return "no_json_found";
    case AnswerStatus::multiple_json_objects: return "multiple_json_objects";
    case AnswerStatus::invalid_json: return "invalid_json";
    case AnswerStatus::missing_key: return "missing_key";
    case AnswerStatus::extra_key: return "extra_key";
    case AnswerStatus::non_string_value: return "non_string_value";
  }
  return "ok";
}

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
};

// Balanced top-level {...} regions, string-literal aware.
std::vector<Span> top_level_objects(std::string_view text) {
  std::vector<Span> spans;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (depth > 0 && in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '{') {
      if (depth == 0) begin = i;
      ++depth;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0) spans.push_back({begin, i + 1});
    } else if (c == '"' && depth > 0) {
      in_string = true;
    }
  }
  return spans;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

}  // namespace

ProbeAnswer parse_answer(std::string_view raw) {
  ProbeAnswer answer;
  answer.raw = std::string(raw);

  const auto spans = top_level_objects(raw);
  if (spans.empty()) {
    answer.status = AnswerStatus::no_json_found;
    answer.surrounding_text = !blank(raw);
    return answer;
  }

  std::vector<std::pair<Span, nlohmann::json>> parsed;
  for (const auto& s : spans) {
    auto j = nlohmann::json::parse(raw.substr(s.begin, s.end - s.begin), nullptr, false);
    if (!j.is_discarded() && j.is_object()) parsed.emplace_back(s, std::move(j));
  }
  if (parsed.empty()) {
    answer.status = AnswerStatus::invalid_json;
    answer.detail = "no candidate object parses as JSON";
    return answer;
  }
  if (parsed.size() > 1) {
    answer.status = AnswerStatus::multiple_json_objects;
    answer.detail = std::to_string(parsed.size()) + " JSON objects in response";
    return answer;
  }

  const auto& [span, obj] = parsed.front();
  answer.surrounding_text = !blank(raw.substr(0, span.begin)) || !blank(raw.substr(span.end));

  for (const char* key : {"cue", "earliest", "latest"}) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      answer.status = AnswerStatus::missing_key;
      answer.detail = std::string("missing key '") + key + "'";
      return answer;
    }
    if (!it->is_string()) {
      answer.status = AnswerStatus::non_string_value;
      answer.detail = std::string("key '") + key + "' is not a string";
      return answer;
    }
  }
  if (obj.size() != 3) {
    for (const auto& [key, _] : obj.items()) {
      if (key != "cue" && key != "earliest" && key != "latest") {
        answer.status = AnswerStatus::extra_key;
        answer.detail = "unexpected key '" + key + "'";
        return answer;
      }
    }
  }
  answer.cue = obj["cue"].get<std::string>();
  answer.earliest = obj["earliest"].get<std::string>();
  answer.latest = obj["latest"].get<std::string>();
  answer.status = AnswerStatus::ok;
  return answer;
}

std::string format_answer(std::string_view cue, std::string_view earliest, std::string_view latest) {
  using nlohmann::json;
  return "{\"cue\":" + json(std::string(cue)).dump() + ", \"earliest\":" + json(std::string(earliest)).dump() +
         ",\"latest\":" + json(std::string(latest)).dump() + "}";
}

}  // namespace dki::prompt
