#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dki/error.hpp"
#include "dki/eval/sweep.hpp"
#include "fixtures.hpp"

namespace dki::eval {
namespace {

namespace fs = std::filesystem;
using prompt::VariantKind;

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dki_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SweepPlan small_plan() {
  SweepPlan plan;
  plan.lengths = {8, 16};
  plan.corpus_size = 12;
  plan.seeds = {0, 1};
  plan.variants = {{VariantKind::baseline}, {VariantKind::index}};
  return plan;
}

std::vector<ProbeJudgement> all_judgements(const SweepReport& r) {
  std::vector<ProbeJudgement> out;
  for (const auto& c : r.cells) out.insert(out.end(), c.judgements.begin(), c.judgements.end());
  return out;
}

void expect_same_metrics(const SweepReport& a, const SweepReport& b) {
  ASSERT_EQ(a.aggregates.size(), b.aggregates.size());
  for (std::size_t i = 0; i < a.aggregates.size(); ++i) {
    EXPECT_EQ(a.aggregates[i].key, b.aggregates[i].key);
    EXPECT_EQ(a.aggregates[i].acc_earliest, b.aggregates[i].acc_earliest);
    EXPECT_EQ(a.aggregates[i].acc_latest, b.aggregates[i].acc_latest);
    EXPECT_EQ(a.aggregates[i].latest_stats.std, b.aggregates[i].latest_stats.std);
  }
}

TEST(Sweep, PerfectMockScoresOneEverywhere) {
  client::ChatClient c(client::mock_endpoint("perfect"));
  const auto r = run_sweep(small_plan(), c);
  EXPECT_TRUE(r.complete);
  ASSERT_EQ(r.cells.size(), 8u);
  ASSERT_EQ(r.aggregates.size(), 4u);
  for (const auto& a : r.aggregates) {
    EXPECT_EQ(a.acc_earliest, 1.0);
    EXPECT_EQ(a.acc_latest, 1.0);
    EXPECT_EQ(a.seeds, 2u);
  }
  EXPECT_EQ(r.template_version, prompt::kTemplateVersion);
  EXPECT_EQ(r.fresh_requests, 8u * 12u);
}

TEST(Sweep, PrimacyMockHistogramsSitAtPositionOne) {
  client::ChatClient c(client::mock_endpoint("primacy_biased"));
  const auto r = run_sweep(small_plan(), c);
  for (const auto& cell : r.cells) {
    ASSERT_EQ(cell.latest_histograms.size(), 1u);
    EXPECT_EQ(cell.latest_histograms[0].counts[0], 12u);
    EXPECT_EQ(cell.latest_histograms[0].total(), 12u);
    EXPECT_EQ(cell.strict.elag, 1.0);
  }
}

TEST(Sweep, DeterministicAcrossRuns) {
  auto plan = small_plan();
  client::ChatClient a(client::mock_endpoint("recency_window(3)", 7));
  client::ChatClient b(client::mock_endpoint("recency_window(3)", 7));
  const auto ra = run_sweep(plan, a);
  const auto rb = run_sweep(plan, b);
  EXPECT_EQ(all_judgements(ra), all_judgements(rb));
  expect_same_metrics(ra, rb);
}

TEST(Sweep, ResumeAfterBudgetMatchesUninterruptedRun) {
  const auto dir = temp_dir("resume");
  auto plan = small_plan();
  client::ChatClient reference_client(client::mock_endpoint("recency_window(3)", 2));
  const auto reference = run_sweep(plan, reference_client);

  plan.store_dir = dir / "store";
  auto cache = std::make_shared<client::ResponseCache>(dir / "cache");
  plan.request_budget = 30;
  client::ChatClient first(client::mock_endpoint("recency_window(3)", 2), cache);
  const auto partial = run_sweep(plan, first);
  EXPECT_FALSE(partial.complete);
  EXPECT_EQ(first.network_calls(), 30u);

  plan.request_budget = std::numeric_limits<std::size_t>::max();
  client::ChatClient second(client::mock_endpoint("recency_window(3)", 2), cache);
  const auto resumed = run_sweep(plan, second);
  EXPECT_TRUE(resumed.complete);
  EXPECT_EQ(second.network_calls(), 8u * 12u - 30u);
  EXPECT_EQ(all_judgements(resumed), all_judgements(reference));
  expect_same_metrics(resumed, reference);
  fs::remove_all(dir);
}

TEST(Sweep, RealWorldCorpusFromFile) {
  SweepPlan plan;
  plan.corpus_path = testing::data_path("italy.jsonl");
  plan.seeds = {0};
  client::ChatClient c(client::mock_endpoint("primacy_biased"));
  const auto r = run_sweep(plan, c);
  ASSERT_EQ(r.aggregates.size(), 1u);
  EXPECT_EQ(r.aggregates[0].key.corpus, "italy");
  EXPECT_EQ(r.aggregates[0].key.length, 0u);
  EXPECT_EQ(r.aggregates[0].acc_latest, 0.0);
  EXPECT_EQ(r.cells[0].latest_histograms.size(), 2u);
}

TEST(Sweep, ReportRoundTripAndRebuild) {
  const auto dir = temp_dir("report");
  client::ChatClient c(client::mock_endpoint("oof_prone(0.5)", 1));
  const auto r = run_sweep(small_plan(), c);
  write_report(dir, r);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "judgements.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "metrics.csv"));
  const auto back = read_report(dir / "report.json");
  EXPECT_EQ(all_judgements(back), all_judgements(r));
  expect_same_metrics(back, r);
  const auto rebuilt = rebuild_report(read_judgements(dir / "judgements.jsonl"));
  EXPECT_EQ(all_judgements(rebuilt), all_judgements(r));
  expect_same_metrics(rebuilt, r);
  fs::remove_all(dir);
}

TEST(Sweep, RejectsEmptyPlans) {
  client::ChatClient c(client::mock_endpoint("perfect"));
  auto plan = small_plan();
  plan.seeds.clear();
  EXPECT_THROW(run_sweep(plan, c), Error);
  plan = small_plan();
  plan.variants.clear();
  EXPECT_THROW(run_sweep(plan, c), Error);
}

}  // namespace
}  // namespace dki::eval
