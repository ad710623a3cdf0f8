#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dki/corpus/trajectory.hpp"

namespace dki::prompt {

// Bumped whenever any rendered byte changes; recorded in every sweep report.
inline constexpr std::string_view kTemplateVersion = "dki-prompts/1";

enum class VariantKind {
  baseline,
  cot,
  two_shot,
  index,
  rehearsal,
  semantic,
  integration,
  forgetting,
  narrative,
};

struct PromptVariant {
  VariantKind kind = VariantKind::baseline;
  unsigned rehearsal_k = 3;  // only read for rehearsal

  bool operator==(const PromptVariant&) const = default;
};

std::string_view to_string(VariantKind kind) noexcept;
// "baseline", "two_shot", "rehearsal" (K=3), "rehearsal:5", ...
std::string variant_name(const PromptVariant& variant);
std::optional<PromptVariant> parse_variant(std::string_view name);

// Baseline followed by the seven alternatives, in report column order.
const std::vector<PromptVariant>& standard_variants();

struct CharRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  bool operator==(const CharRange&) const = default;
};

struct ProbePrompt {
  std::string text;
  PromptVariant variant;
  std::string trajectory_id;
  // From the start of the "START:" line through the end of the "END" line.
  CharRange record_block;
};

struct Record {
  std::string cue;
  std::string value;

  bool operator==(const Record&) const = default;
};

// Throws unsupported_variant for VariantKind::narrative, invalid_config when a
// cue holds ':' or a newline, or a value holds a newline.
ProbePrompt render_probe_prompt(const DkiTrajectory& trajectory, const PromptVariant& variant);

// Probe over a rewritten narrative document (trajectory.document).
ProbePrompt render_narrative_probe(const DkiTrajectory& trajectory);

// Instruction for a rewriter model to turn the updates into a narrative.
ProbePrompt render_narrative_rewrite_request(const DkiTrajectory& trajectory);

// Records between the last "START:" marker line and the next "END" line.
// Sequential "1. ", "2. ", ... prefixes are removed when every line has one.
std::vector<Record> extract_records(std::string_view prompt_text);

std::vector<Record> records_of(const DkiTrajectory& trajectory);

struct NarrativeCheck {
  bool ok = true;
  std::vector<std::size_t> missing;     // 0-based value indices never found
  std::vector<std::size_t> repeated;    // found more than once
  std::vector<std::size_t> out_of_order;
};

// Every value verbatim, exactly once, in trajectory order.
NarrativeCheck check_narrative(std::string_view document, const DkiTrajectory& trajectory);

}  // namespace dki::prompt
