#pragma once

#include <iosfwd>

#include "config.hpp"

namespace dki::cli {

// Each command writes human-readable progress to `out` and returns an exit
// code. dki::Error escapes to the caller, which maps it with exit_code_for.
int cmd_generate(const RunConfig& config, std::ostream& out);
int cmd_probe(const RunConfig& config, std::ostream& out);
// `input`: a probe output directory, a report.json, or a judgements .jsonl.
int cmd_report(const RunConfig& config, const std::filesystem::path& input, std::ostream& out);
int cmd_analyze(const RunConfig& config, std::ostream& out);
int cmd_export_prompts(const RunConfig& config, const std::filesystem::path& bundle, std::ostream& out);
// With as_json, prints one machine-readable report instead of text lines.
int cmd_validate_traces(const RunConfig& config, bool as_json, std::ostream& out);

}  // namespace dki::cli
