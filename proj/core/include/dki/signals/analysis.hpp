#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dki/eval/judge.hpp"
#include "dki/signals/scores.hpp"

namespace dki::signals {

struct MatchRate {
  std::vector<double> rate;         // per layer; NaN when no sample is included
  std::vector<std::size_t> ties;    // per layer, samples whose argmax was tied
  std::size_t included = 0;
  std::size_t excluded_oof = 0;
  std::size_t excluded_parse_fail = 0;

  bool defined() const noexcept { return included > 0; }
};

// Per layer, the fraction of samples whose head-averaged attention argmax
// (ties go to the later candidate) equals the predicted latest candidate.
// Traces and judgements pair by index and must share sample ids.
MatchRate layer_match_rate(std::span<const ActivationTrace> traces, std::span<const eval::ProbeJudgement> judgements);

struct GroupAggregate {
  std::optional<SignalSummary> correct;  // elementwise means
  std::optional<SignalSummary> wrong;
  std::size_t correct_count = 0;
  std::size_t wrong_count = 0;
  std::size_t excluded = 0;  // parse failures
};

// Groups by latest-state correctness. Throws pairing_mismatch or
// shape_mismatch.
GroupAggregate group_aggregate(std::span<const SignalSummary> summaries, std::span<const eval::ProbeJudgement> judgements);

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::vector<std::string> details;
};

struct ValidationReport {
  std::string sample_id;
  std::vector<ValidationCheck> checks;

  bool ok() const noexcept;
  const ValidationCheck* find(std::string_view name) const;
};

inline constexpr double kRowSumTolerance = 1e-4;
inline constexpr double kProbabilityMassTolerance = 1e-6;

ValidationReport validate_trace(const ActivationTrace& trace);

}  // namespace dki::signals
