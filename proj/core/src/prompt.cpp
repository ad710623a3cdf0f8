#include "dki/prompting/prompt.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include <json.hpp>

#include "dki/error.hpp"
#include "templates.hpp"

namespace dki::prompt {

std::string_view to_string(VariantKind kind) noexcept {
  switch (kind) {
    case VariantKind::baseline: return "baseline";
    case VariantKind::cot: return "cot";
    case VariantKind::two_shot: return "two_shot";
    case VariantKind::index: return "index";
    case VariantKind::rehearsal: return "rehearsal";
    case VariantKind::semantic: return "semantic";
    case VariantKind::integration: return "integration";
    case VariantKind::forgetting: return "forgetting";
    case VariantKind::narrative: return "narrative";
  }
  return "baseline";
}

std::string variant_name(const PromptVariant& variant) {
  if (variant.kind == VariantKind::rehearsal && variant.rehearsal_k != 3) {
    return fmt::format("rehearsal:{}", variant.rehearsal_k);
  }
  return std::string(to_string(variant.kind));
}

std::optional<PromptVariant> parse_variant(std::string_view name) {
  static constexpr VariantKind kAll[] = {
      VariantKind::baseline,  VariantKind::cot,         VariantKind::two_shot,
      VariantKind::index,     VariantKind::rehearsal,   VariantKind::semantic,
      VariantKind::integration, VariantKind::forgetting, VariantKind::narrative,
  };
  std::string_view head = name;
  std::optional<unsigned> k;
  if (auto colon = name.find(':'); colon != std::string_view::npos) {
    head = name.substr(0, colon);
    auto digits = name.substr(colon + 1);
    unsigned parsed = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), parsed);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || parsed == 0) return std::nullopt;
    k = parsed;
  }
  for (auto kind : kAll) {
    if (to_string(kind) == head) {
      if (k && kind != VariantKind::rehearsal) return std::nullopt;
      return PromptVariant{kind, k.value_or(3)};
    }
  }
  return std::nullopt;
}

const std::vector<PromptVariant>& standard_variants() {
  static const std::vector<PromptVariant> variants = {
      {VariantKind::baseline},  {VariantKind::cot},       {VariantKind::two_shot},
      {VariantKind::index},     {VariantKind::rehearsal}, {VariantKind::semantic},
      {VariantKind::integration}, {VariantKind::forgetting},
  };
  return variants;
}

namespace {

std::string times_phrase(unsigned k) {
  static constexpr const char* kWords[] = {"zero", "one", "two",   "three", "four", "five",
                                           "six",  "seven", "eight", "nine",  "ten"};
  if (k == 1) return "once";
  if (k < std::size(kWords)) return fmt::format("{} times", kWords[k]);
  return fmt::format("{} times", k);
}

std::string cue_json(const std::string& cue) { return nlohmann::json::array({cue}).dump(); }

void check_renderable(const DkiTrajectory& t) {
  if (t.values.empty()) throw Error(ErrorCode::invalid_config, "trajectory '" + t.id + "' has no values");
  if (t.cue.find_first_of(":\n\r") != std::string::npos) {
    throw Error(ErrorCode::invalid_config, "cue of '" + t.id + "' contains ':' or a line break");
  }
  for (const auto& v : t.values) {
    if (v.find_first_of("\n\r") != std::string::npos) {
      throw Error(ErrorCode::invalid_config, "a value of '" + t.id + "' contains a line break");
    }
  }
}

CharRange marker_block(const std::string& text) {
  // The record block is the last START: line; END closes it.
  const std::size_t start = text.rfind("\nSTART:\n");
  const std::size_t end = text.find("\nEND\n", start + 1);
  return {start + 1, end + 4};
}

}  // namespace

std::vector<Record> records_of(const DkiTrajectory& trajectory) {
  std::vector<Record> out;
  out.reserve(trajectory.values.size());
  for (const auto& v : trajectory.values) out.push_back({trajectory.cue, v});
  return out;
}

ProbePrompt render_probe_prompt(const DkiTrajectory& trajectory, const PromptVariant& variant) {
  using namespace templates;
  if (variant.kind == VariantKind::narrative) {
    throw Error(ErrorCode::unsupported_variant,
                "narrative prompts are built with render_narrative_probe / render_narrative_rewrite_request");
  }
  if (variant.kind == VariantKind::rehearsal && variant.rehearsal_k == 0) {
    throw Error(ErrorCode::invalid_config, "rehearsal K must be positive");
  }
  check_renderable(trajectory);

  std::string records;
  for (std::size_t i = 0; i < trajectory.values.size(); ++i) {
    if (i) records += '\n';
    if (variant.kind == VariantKind::index) records += fmt::format("{}. ", i + 1);
    records += trajectory.cue;
    records += ':';
    records += trajectory.values[i];
  }

  std::string preamble;
  switch (variant.kind) {
    case VariantKind::cot: preamble = kCot; break;
    case VariantKind::two_shot: preamble = kTwoShot; break;
    case VariantKind::rehearsal:
      preamble = fill_template(kRehearsal, {{"K", times_phrase(variant.rehearsal_k)}});
      break;
    case VariantKind::semantic: preamble = kSemantic; break;
    case VariantKind::integration: preamble = kIntegration; break;
    case VariantKind::forgetting: preamble = kForgetting; break;
    default: break;
  }
  if (!preamble.empty()) preamble += '\n';

  ProbePrompt p;
  p.text = fill_template(kProbe, {{"PREAMBLE", preamble},
                                  {"CUE_JSON", cue_json(trajectory.cue)},
                                  {"FORMAT_NOTES", variant.kind == VariantKind::index ? std::string(kIndexNote) : ""},
                                  {"RECORDS", records}});
  p.variant = variant;
  p.trajectory_id = trajectory.id;
  p.record_block = marker_block(p.text);
  return p;
}

ProbePrompt render_narrative_probe(const DkiTrajectory& trajectory) {
  if (!trajectory.document || trajectory.document->empty()) {
    throw Error(ErrorCode::invalid_config, "trajectory '" + trajectory.id + "' has no narrative document");
  }
  std::string doc = *trajectory.document;
  while (!doc.empty() && (doc.back() == '\n' || doc.back() == '\r')) doc.pop_back();
  ProbePrompt p;
  p.text = templates::fill_template(templates::kNarrativeProbe,
                                    {{"CUE_JSON", cue_json(trajectory.cue)}, {"DOCUMENT", doc}});
  p.variant = {VariantKind::narrative};
  p.trajectory_id = trajectory.id;
  p.record_block = marker_block(p.text);
  return p;
}

ProbePrompt render_narrative_rewrite_request(const DkiTrajectory& trajectory) {
  check_renderable(trajectory);
  std::string records;
  for (std::size_t i = 0; i < trajectory.values.size(); ++i) {
    if (i) records += '\n';
    records += fmt::format("{}. {}:{}", i + 1, trajectory.cue, trajectory.values[i]);
  }
  ProbePrompt p;
  p.text = templates::fill_template(
      templates::kRewriteRequest,
      {{"CUE", trajectory.cue}, {"COUNT", std::to_string(trajectory.values.size())}, {"RECORDS", records}});
  p.variant = {VariantKind::narrative};
  p.trajectory_id = trajectory.id;
  p.record_block = marker_block(p.text);
  return p;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

// Length of a "<n>. " prefix carrying exactly `expected`, else 0.
std::size_t index_prefix(std::string_view line, std::size_t expected) {
  const auto digits = std::to_string(expected);
  if (line.size() > digits.size() + 2 && line.substr(0, digits.size()) == digits &&
      line.substr(digits.size(), 2) == ". ") {
    return digits.size() + 2;
  }
  return 0;
}

}  // namespace

std::vector<Record> extract_records(std::string_view text) {
  const auto lines = split_lines(text);
  std::optional<std::size_t> start;
  for (std::size_t i = lines.size(); i-- > 0;) {
    if (lines[i] == "START:") {
      start = i;
      break;
    }
  }
  if (!start) throw Error(ErrorCode::missing_markers, "no START: marker line");
  std::optional<std::size_t> end;
  for (std::size_t i = *start + 1; i < lines.size(); ++i) {
    if (lines[i] == "END") {
      end = i;
      break;
    }
  }
  if (!end) throw Error(ErrorCode::missing_markers, "no END marker line after START:");

  const std::size_t first = *start + 1;
  const std::size_t count = *end - first;
  bool indexed = count > 0;
  for (std::size_t i = 0; i < count && indexed; ++i) indexed = index_prefix(lines[first + i], i + 1) > 0;

  std::vector<Record> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto line = lines[first + i];
    if (indexed) line.remove_prefix(index_prefix(line, i + 1));
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::malformed_line,
                  fmt::format("record line {} has no ':' separator: '{}'", i + 1, std::string(line)));
    }
    out.push_back({std::string(line.substr(0, colon)), std::string(line.substr(colon + 1))});
  }
  return out;
}

NarrativeCheck check_narrative(std::string_view document, const DkiTrajectory& trajectory) {
  NarrativeCheck check;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < trajectory.values.size(); ++i) {
    const auto& v = trajectory.values[i];
    const std::size_t first = document.find(v);
    if (first == std::string_view::npos) {
      check.missing.push_back(i);
      continue;
    }
    if (document.find(v, first + 1) != std::string_view::npos) check.repeated.push_back(i);
    const std::size_t after = document.find(v, cursor);
    if (after == std::string_view::npos) {
      check.out_of_order.push_back(i);
    } else {
      cursor = after + v.size();
    }
  }
  check.ok = check.missing.empty() && check.repeated.empty() && check.out_of_order.empty();
  return check;
}

}  // namespace dki::prompt
