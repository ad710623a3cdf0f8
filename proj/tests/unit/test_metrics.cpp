#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dki/error.hpp"
#include "dki/eval/metrics.hpp"
#include "fixtures.hpp"

namespace dki::eval {
namespace {

using testing::endpoint_judgements;

TEST(Metrics, RealWorldRowReproducesPublishedPercentages) {
  const auto js = endpoint_judgements(testing::kReferenceItems, testing::kReferenceEarliest, testing::kReferenceLatest);
  const auto cell = metric_cell(js, {"real_world", 0, "baseline"});
  EXPECT_EQ(percent(cell.acc_earliest), "96.34");
  EXPECT_EQ(percent(cell.acc_latest), "75.61");
  EXPECT_EQ(percent(cell.elag), "20.73");
  EXPECT_EQ(percent(cell.correct_earliest, cell.n), "96.34");
  EXPECT_DOUBLE_EQ(cell.elag, cell.acc_earliest - cell.acc_latest);
  EXPECT_EQ(cell.seeds, 1u);
}

TEST(Metrics, SeedAggregationUsesPopulationStd) {
  std::vector<MetricCell> cells;
  for (std::size_t s = 0; s < testing::kSeedLatestCounts.size(); ++s) {
    const auto js = endpoint_judgements(testing::kSeedItems, testing::kSeedItems, testing::kSeedLatestCounts[s],
                                        "baseline", s);
    cells.push_back(metric_cell(js, {"synthetic", 32, "baseline"}));
  }
  const auto agg = aggregate_seeds(cells);
  EXPECT_EQ(agg.seeds, 5u);
  EXPECT_EQ(percent(agg.latest_stats.mean), "18.67");
  EXPECT_EQ(percent(agg.latest_stats.std), "0.47");
  EXPECT_NEAR(agg.latest_stats.std, std::sqrt(2.0) / 300.0, 1e-15);
  EXPECT_EQ(percent(agg.earliest_stats.std), "0.00");
  EXPECT_NEAR(agg.elag_stats.mean, agg.earliest_stats.mean - agg.latest_stats.mean, 1e-15);
  EXPECT_EQ(agg.n, 1500u);
}

TEST(Metrics, AggregationRejectsMismatchedKeys) {
  const auto js = endpoint_judgements(10, 5, 5);
  std::vector<MetricCell> cells{metric_cell(js, {"synthetic", 32, "baseline"}),
                                metric_cell(js, {"synthetic", 64, "baseline"})};
  try {
    aggregate_seeds(cells);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_mismatch);
  }
  EXPECT_THROW(aggregate_seeds(std::span<const MetricCell>{}), Error);
}

TEST(Metrics, EmptyInputThrows) {
  std::vector<ProbeJudgement> none;
  EXPECT_THROW(accuracy(none, Endpoint::latest), Error);
  EXPECT_THROW(metric_cell(none, {}), Error);
  EXPECT_THROW(percent(0, 0), Error);
}

TEST(Metrics, ElagIsDifferenceEverywhere) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 50;
    const auto js = endpoint_judgements(n, rng() % (n + 1), rng() % (n + 1));
    const auto cell = metric_cell(js, {});
    EXPECT_EQ(cell.elag, cell.acc_earliest - cell.acc_latest);
    EXPECT_GE(cell.elag, -1.0);
    EXPECT_LE(cell.elag, 1.0);
  }
  EXPECT_EQ(elag(1.0, 0.0), 1.0);
}

TEST(Metrics, LenientModeReadsLenientFlags) {
  auto js = endpoint_judgements(4, 0, 0);
  js[0].latest_correct_lenient = true;
  EXPECT_EQ(accuracy(js, Endpoint::latest, MatchMode::strict), 0.0);
  EXPECT_EQ(accuracy(js, Endpoint::latest, MatchMode::lenient), 0.25);
}

TEST(Histogram, ConservesTotalsAndAttributesLastMatch) {
  std::mt19937_64 rng(11);
  std::vector<ProbeJudgement> js;
  const std::size_t T = 6;
  std::size_t oof = 0, fail = 0;
  for (int i = 0; i < 500; ++i) {
    ProbeJudgement j;
    j.length = T;
    const auto r = rng() % 10;
    if (r == 0) {
      j.latest_pos = {PositionKind::parse_fail, {}};
      ++fail;
    } else if (r == 1) {
      j.latest_pos = {PositionKind::oof, {}};
      ++oof;
    } else {
      const std::size_t a = 1 + rng() % T;
      const std::size_t b = a + rng() % (T - a + 1);
      j.latest_pos = {PositionKind::candidate, a == b ? std::vector<std::size_t>{a} : std::vector<std::size_t>{a, b}};
    }
    js.push_back(j);
  }
  const auto h = position_histogram(js, T);
  EXPECT_EQ(h.total(), js.size());
  EXPECT_EQ(h.oof, oof);
  EXPECT_EQ(h.parse_fail, fail);
  std::vector<std::size_t> expect(T, 0);
  for (const auto& j : js) {
    if (j.latest_pos.kind == PositionKind::candidate) ++expect[j.latest_pos.matches.back() - 1];
  }
  EXPECT_EQ(h.counts, expect);
}

TEST(Histogram, MixedLengthsThrow) {
  std::vector<ProbeJudgement> js(2);
  js[0].length = 4;
  js[1].length = 5;
  try {
    position_histogram(js, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::mixed_t);
  }
}

}  // namespace
}  // namespace dki::eval
