#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dki/client/client.hpp"
#include "dki/eval/metrics.hpp"

namespace dki::eval {

struct SweepPlan {
  // Synthetic grid; ignored when corpus_path is set.
  std::vector<std::size_t> lengths{32, 64, 128, 256, 512};
  std::size_t corpus_size = 200;
  std::vector<std::string> word_pool;
  std::size_t word_length = 8;
  // Real-world or narrative JSONL corpus.
  std::optional<std::filesystem::path> corpus_path;

  std::vector<prompt::PromptVariant> variants{prompt::PromptVariant{}};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  MatchPolicy match;
  // Narrative documents failing the verbatim-once check are left out of
  // accuracy unless this is set.
  bool include_flagged_narratives = false;

  // Finished cells are written here and reloaded on the next run.
  std::optional<std::filesystem::path> store_dir;
  // Stop once this many uncached endpoint calls were made.
  std::size_t request_budget = std::numeric_limits<std::size_t>::max();
};

struct SampleError {
  std::string sample_id;
  std::string message;
};

struct ResponseRecord {
  std::string sample_id;
  std::uint64_t seed = 0;
  std::string key;
  std::string raw_text;
  bool cache_hit = false;
};

struct SweepCell {
  CellKey key;
  std::uint64_t seed = 0;
  MetricCell strict;
  MetricCell lenient;
  std::vector<PositionHistogram> latest_histograms;    // one per distinct T
  std::vector<PositionHistogram> earliest_histograms;
  std::size_t swaps = 0;
  std::size_t parse_failures = 0;
  std::size_t duplicate_value_samples = 0;
  std::size_t narrative_excluded = 0;
  std::vector<ProbeJudgement> judgements;
  std::vector<SampleError> errors;
  std::vector<ResponseRecord> responses;  // empty when reloaded from the store
};

struct SweepReport {
  std::string template_version;
  std::string model_id;
  MatchMode match_mode = MatchMode::strict;
  bool complete = true;  // false when interrupted by the request budget
  std::size_t fresh_requests = 0;
  std::vector<SweepCell> cells;
  std::vector<MetricCell> aggregates;          // over seeds, strict
  std::vector<MetricCell> lenient_aggregates;
};

SweepReport run_sweep(const SweepPlan& plan, client::ChatClient& client);

// Re-derives cells and aggregates from judgements alone.
SweepReport rebuild_report(std::vector<ProbeJudgement> judgements, std::string model_id = {},
                           std::string template_version = {});

// Sweep persistence. report.json holds the full lattice including per-sample
// judgements; judgements.jsonl one judgement per line; metrics.csv one row per
// (corpus, T, variant, metric).
void write_report(const std::filesystem::path& dir, const SweepReport& report);
SweepReport read_report(const std::filesystem::path& report_json);

void write_judgements(const std::filesystem::path& path, std::span<const ProbeJudgement> judgements);
std::vector<ProbeJudgement> read_judgements(const std::filesystem::path& path);
std::string judgement_to_json(const ProbeJudgement& judgement);
ProbeJudgement judgement_from_json(std::string_view line);

void write_metrics_csv(const std::filesystem::path& path, const SweepReport& report);

}  // namespace dki::eval
