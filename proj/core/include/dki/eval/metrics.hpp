#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dki/eval/judge.hpp"

namespace dki::eval {

enum class Endpoint { earliest, latest };

// Throws empty_input on an empty list.
double accuracy(std::span<const ProbeJudgement> judgements, Endpoint endpoint, MatchMode mode = MatchMode::strict);

constexpr double elag(double acc_earliest, double acc_latest) noexcept { return acc_earliest - acc_latest; }

struct CellKey {
  std::string corpus;
  std::size_t length = 0;  // 0: mixed-T corpus
  std::string variant;

  bool operator==(const CellKey&) const = default;
  auto operator<=>(const CellKey&) const = default;
};

struct SeedStat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
};

struct MetricCell {
  CellKey key;
  std::size_t n = 0;
  std::size_t correct_earliest = 0;
  std::size_t correct_latest = 0;
  double acc_earliest = 0.0;
  double acc_latest = 0.0;
  double elag = 0.0;  // always acc_earliest - acc_latest
  std::size_t seeds = 1;
  SeedStat earliest_stats;
  SeedStat latest_stats;
  SeedStat elag_stats;
};

MetricCell metric_cell(std::span<const ProbeJudgement> judgements, CellKey key,
                       MatchMode mode = MatchMode::strict);

// Per-metric mean and population std. Throws config_mismatch when keys differ.
MetricCell aggregate_seeds(std::span<const MetricCell> cells);

// Two-decimal percentage, e.g. 0.963414 -> "96.34".
std::string percent(double fraction);
// From exact counts.
std::string percent(std::size_t count, std::size_t total);

struct PositionHistogram {
  std::size_t length = 0;
  std::vector<std::size_t> counts;  // counts[t-1] for position t
  std::size_t oof = 0;
  std::size_t parse_fail = 0;

  std::size_t total() const noexcept;
};

// Throws mixed_t when any judgement's T differs from `length`.
PositionHistogram position_histogram(std::span<const ProbeJudgement> judgements, std::size_t length,
                                     Endpoint endpoint = Endpoint::latest);

}  // namespace dki::eval
