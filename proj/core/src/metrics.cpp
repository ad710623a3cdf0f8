#include "dki/eval/metrics.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dki/error.hpp"

namespace dki::eval {

namespace {

bool correct(const ProbeJudgement& j, Endpoint endpoint, MatchMode mode) {
  if (mode == MatchMode::lenient) return endpoint == Endpoint::earliest ? j.earliest_correct_lenient : j.latest_correct_lenient;
  return endpoint == Endpoint::earliest ? j.earliest_correct : j.latest_correct;
}

std::size_t count_correct(std::span<const ProbeJudgement> judgements, Endpoint endpoint, MatchMode mode) {
  std::size_t c = 0;
  for (const auto& j : judgements) c += correct(j, endpoint, mode) ? 1 : 0;
  return c;
}

SeedStat stats(const std::vector<double>& xs) {
  SeedStat s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return s;
}

}  // namespace

double accuracy(std::span<const ProbeJudgement> judgements, Endpoint endpoint, MatchMode mode) {
  if (judgements.empty()) throw Error(ErrorCode::empty_input, "accuracy over zero judgements");
  return static_cast<double>(count_correct(judgements, endpoint, mode)) / static_cast<double>(judgements.size());
}

MetricCell metric_cell(std::span<const ProbeJudgement> judgements, CellKey key, MatchMode mode) {
  if (judgements.empty()) throw Error(ErrorCode::empty_input, "metric cell over zero judgements");
  MetricCell cell;
  cell.key = std::move(key);
  cell.n = judgements.size();
  cell.correct_earliest = count_correct(judgements, Endpoint::earliest, mode);
  cell.correct_latest = count_correct(judgements, Endpoint::latest, mode);
  cell.acc_earliest = static_cast<double>(cell.correct_earliest) / static_cast<double>(cell.n);
  cell.acc_latest = static_cast<double>(cell.correct_latest) / static_cast<double>(cell.n);
  cell.elag = elag(cell.acc_earliest, cell.acc_latest);
  cell.seeds = 1;
  cell.earliest_stats = {cell.acc_earliest, 0.0};
  cell.latest_stats = {cell.acc_latest, 0.0};
  cell.elag_stats = {cell.elag, 0.0};
  return cell;
}

MetricCell aggregate_seeds(std::span<const MetricCell> cells) {
  if (cells.empty()) throw Error(ErrorCode::empty_input, "aggregate_seeds needs at least one cell");
  for (const auto& c : cells) {
    if (!(c.key == cells.front().key)) {
      throw Error(ErrorCode::config_mismatch,
                  fmt::format("cannot aggregate {}/T{}/{} with {}/T{}/{}", cells.front().key.corpus,
                              cells.front().key.length, cells.front().key.variant, c.key.corpus, c.key.length,
                              c.key.variant));
    }
  }
  std::vector<double> e, l, g;
  MetricCell out;
  out.key = cells.front().key;
  for (const auto& c : cells) {
    e.push_back(c.acc_earliest);
    l.push_back(c.acc_latest);
    g.push_back(c.elag);
    out.n += c.n;
    out.correct_earliest += c.correct_earliest;
    out.correct_latest += c.correct_latest;
  }
  out.seeds = cells.size();
  out.earliest_stats = stats(e);
  out.latest_stats = stats(l);
  out.elag_stats = stats(g);
  out.acc_earliest = out.earliest_stats.mean;
  out.acc_latest = out.latest_stats.mean;
  out.elag = elag(out.acc_earliest, out.acc_latest);
  return out;
}

std::string percent(double fraction) { return fmt::format("{:.2f}", 100.0 * fraction); }

std::string percent(std::size_t count, std::size_t total) {
  if (total == 0) throw Error(ErrorCode::empty_input, "percentage of zero items");
  return fmt::format("{:.2f}", 100.0 * static_cast<double>(count) / static_cast<double>(total));
}

std::size_t PositionHistogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0}) + oof + parse_fail;
}

PositionHistogram position_histogram(std::span<const ProbeJudgement> judgements, std::size_t length,
                                     Endpoint endpoint) {
  PositionHistogram h;
  h.length = length;
  h.counts.assign(length, 0);
  for (const auto& j : judgements) {
    if (j.length != length) {
      throw Error(ErrorCode::mixed_t,
                  fmt::format("judgement {} has T={} in a T={} histogram", j.sample_id, j.length, length));
    }
    const auto& pos = endpoint == Endpoint::earliest ? j.earliest_pos : j.latest_pos;
    switch (pos.kind) {
      case PositionKind::candidate: ++h.counts[pos.attributed() - 1]; break;
      case PositionKind::oof: ++h.oof; break;
      case PositionKind::parse_fail: ++h.parse_fail; break;
    }
  }
  return h;
}

}  // namespace dki::eval
