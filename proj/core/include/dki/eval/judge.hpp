#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dki/corpus/trajectory.hpp"
#include "dki/prompting/answer.hpp"
#include "dki/prompting/prompt.hpp"

namespace dki::eval {

// strict: trim surrounding whitespace, then exact case-sensitive equality.
// lenient: additionally ASCII case-fold and collapse internal whitespace.
enum class MatchMode { strict, lenient };

struct MatchPolicy {
  MatchMode mode = MatchMode::strict;
};

std::string normalize(std::string_view text, MatchMode mode);
std::string_view to_string(MatchMode mode) noexcept;

enum class PositionKind { candidate, oof, parse_fail };

struct PredictedPosition {
  PositionKind kind = PositionKind::parse_fail;
  std::vector<std::size_t> matches;  // 1-based candidate indices, ascending

  // Histogram attribution: last matching index.
  std::size_t attributed() const { return matches.back(); }
  bool operator==(const PredictedPosition&) const = default;
};

struct ProbeJudgement {
  std::string sample_id;  // "<trajectory_id>|<variant>"
  std::string trajectory_id;
  std::string corpus;     // e.g. "synthetic" or a file stem
  std::size_t length = 0; // T of the judged trajectory
  std::size_t cell_length = 0;  // T shared by the cell, 0 when mixed
  prompt::PromptVariant variant;
  std::uint64_t seed = 0;

  prompt::AnswerStatus answer_status = prompt::AnswerStatus::no_json_found;
  std::string predicted_earliest;
  std::string predicted_latest;

  bool earliest_correct = false;
  bool latest_correct = false;
  bool earliest_correct_lenient = false;
  bool latest_correct_lenient = false;
  PredictedPosition earliest_pos;
  PredictedPosition latest_pos;
  bool swapped = false;          // earliest/latest answered the other way round
  bool duplicate_values = false; // trajectory repeats a value
  bool narrative_flagged = false; // document failed the verbatim-once check

  bool parse_failed() const noexcept { return answer_status != prompt::AnswerStatus::ok; }
  bool operator==(const ProbeJudgement&) const = default;
};

ProbeJudgement judge_answer(const prompt::ProbeAnswer& answer, const DkiTrajectory& trajectory,
                            const MatchPolicy& policy = {});

std::string sample_id(std::string_view trajectory_id, const prompt::PromptVariant& variant);

}  // namespace dki::eval
