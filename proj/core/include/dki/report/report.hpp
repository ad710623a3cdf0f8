#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dki/eval/sweep.hpp"
#include "dki/signals/analysis.hpp"

namespace dki::report {

// Column label used in tables: "WO", "CoT", "2-Shot", ...
std::string variant_label(std::string_view variant_name);

// One block per (corpus, T) with Earliest/Latest/ELAG rows and one column per
// variant. Cells are "96.34", or "18.67±0.47" when aggregated over seeds.
std::string render_endpoint_table(std::span<const eval::MetricCell> aggregates);

// Groups as rows, variants as columns, one metric per table.
std::string render_seed_table(std::span<const eval::MetricCell> aggregates, eval::Endpoint endpoint);

// variant,corpus,T,seeds,acc_earliest,acc_latest,elag (fractions, full precision)
void write_elag_series_csv(const std::filesystem::path& path, std::span<const eval::MetricCell> aggregates);

// corpus,T,variant,seed,endpoint,position,count; position is 1..T, OOF or PARSE_FAIL.
void write_histogram_csv(const std::filesystem::path& path, std::span<const eval::SweepCell> cells);

void write_matrix_csv(const std::filesystem::path& path, const signals::Matrix& matrix, std::string_view row_prefix,
                      std::string_view col_prefix);

struct ReportFiles {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> notes;
};

// tables.txt, elag_series.csv, histograms.csv, accuracy.svg, elag.svg and one
// histogram_*.svg per (corpus, T, variant) summed over seeds.
ReportFiles write_sweep_report(const std::filesystem::path& dir, const eval::SweepReport& report);

struct AnalysisInput {
  std::vector<signals::SignalSummary> summaries;
  signals::GroupAggregate groups;
  signals::MatchRate match_rate;
  std::vector<signals::ValidationReport> invalid;
};

// summaries.jsonl, match_rate.csv, groups.json and per-group matrix CSV plus
// SVG heatmaps. A group with no samples gets a note instead of files.
ReportFiles write_analysis_report(const std::filesystem::path& dir, const AnalysisInput& input);

std::string summary_to_json(const signals::SignalSummary& summary);

}  // namespace dki::report
