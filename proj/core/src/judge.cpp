#include "dki/eval/judge.hpp"

#include <algorithm>
#include <unordered_set>

namespace dki::eval {

std::string_view to_string(MatchMode mode) noexcept { return mode == MatchMode::strict ? "strict" : "lenient"; }

std::string normalize(std::string_view text, MatchMode mode) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto first = text.find_first_not_of(kSpace);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(kSpace);
  text = text.substr(first, last - first + 1);
  if (mode == MatchMode::strict) return std::string(text);

  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char c : text) {
    if (kSpace.find(c) != std::string_view::npos) {
      in_space = true;
      continue;
    }
    if (in_space) out += ' ';
    in_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

std::string sample_id(std::string_view trajectory_id, const prompt::PromptVariant& variant) {
  return std::string(trajectory_id) + "|" + prompt::variant_name(variant);
}

namespace {

bool is_unknown(std::string_view s) { return normalize(s, MatchMode::strict) == prompt::kUnknown; }

PredictedPosition locate(std::string_view predicted, const std::vector<std::string>& normalized_values,
                         MatchMode mode) {
  PredictedPosition pos;
  pos.kind = PositionKind::oof;
  if (is_unknown(predicted)) return pos;
  const auto needle = normalize(predicted, mode);
  for (std::size_t i = 0; i < normalized_values.size(); ++i) {
    if (normalized_values[i] == needle) pos.matches.push_back(i + 1);
  }
  if (!pos.matches.empty()) pos.kind = PositionKind::candidate;
  return pos;
}

bool matches_value(std::string_view predicted, std::string_view value, MatchMode mode) {
  return !is_unknown(predicted) && normalize(predicted, mode) == normalize(value, mode);
}

}  // namespace

ProbeJudgement judge_answer(const prompt::ProbeAnswer& answer, const DkiTrajectory& trajectory,
                            const MatchPolicy& policy) {
  ProbeJudgement j;
  j.trajectory_id = trajectory.id;
  j.length = trajectory.length();
  j.answer_status = answer.status;
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& v : trajectory.values) {
      if (!seen.insert(v).second) {
        j.duplicate_values = true;
        break;
      }
    }
  }
  if (!answer.ok()) return j;  // parse_fail positions, nothing correct

  j.predicted_earliest = answer.earliest;
  j.predicted_latest = answer.latest;

  const auto& first = trajectory.values.front();
  const auto& last = trajectory.values.back();
  j.earliest_correct = matches_value(answer.earliest, first, policy.mode);
  j.latest_correct = matches_value(answer.latest, last, policy.mode);
  j.earliest_correct_lenient = matches_value(answer.earliest, first, MatchMode::lenient);
  j.latest_correct_lenient = matches_value(answer.latest, last, MatchMode::lenient);

  std::vector<std::string> normalized;
  normalized.reserve(trajectory.values.size());
  for (const auto& v : trajectory.values) normalized.push_back(normalize(v, policy.mode));
  j.earliest_pos = locate(answer.earliest, normalized, policy.mode);
  j.latest_pos = locate(answer.latest, normalized, policy.mode);

  j.swapped = trajectory.length() >= 2 && normalize(first, policy.mode) != normalize(last, policy.mode) &&
              matches_value(answer.earliest, last, policy.mode) && matches_value(answer.latest, first, policy.mode);
  return j;
}

}  // namespace dki::eval
