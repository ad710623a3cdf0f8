#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "dki/report/report.hpp"
#include "dki/report/svg.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

namespace dki::report {
namespace {

namespace fs = std::filesystem;
using prompt::VariantKind;

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dki_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

eval::SweepReport small_sweep(const std::string& policy) {
  eval::SweepPlan plan;
  plan.lengths = {8, 16, 32};
  plan.corpus_size = 10;
  plan.seeds = {0, 1, 2};
  plan.variants = {{VariantKind::baseline}, {VariantKind::rehearsal, 3}};
  client::ChatClient c(client::mock_endpoint(policy, 3));
  return eval::run_sweep(plan, c);
}

TEST(Tables, RealWorldCellsMatchCounts) {
  const auto js = testing::endpoint_judgements(testing::kReferenceItems, testing::kReferenceEarliest, testing::kReferenceLatest);
  const std::vector<eval::MetricCell> cells{eval::metric_cell(js, {"real_world", 0, "baseline"})};
  const auto table = render_endpoint_table(cells);
  EXPECT_NE(table.find("WO"), std::string::npos);
  EXPECT_NE(table.find("96.34"), std::string::npos);
  EXPECT_NE(table.find("75.61"), std::string::npos);
  EXPECT_NE(table.find("20.73"), std::string::npos);
}

TEST(Tables, SeedCellsShowMeanAndStd) {
  std::vector<eval::MetricCell> seeds;
  for (std::size_t s = 0; s < testing::kSeedLatestCounts.size(); ++s) {
    seeds.push_back(eval::metric_cell(
        testing::endpoint_judgements(testing::kSeedItems, testing::kSeedItems, testing::kSeedLatestCounts[s]),
        {"synthetic", 32, "baseline"}));
  }
  const std::vector<eval::MetricCell> agg{eval::aggregate_seeds(seeds)};
  EXPECT_NE(render_endpoint_table(agg).find("18.67±0.47"), std::string::npos);
  EXPECT_NE(render_seed_table(agg, eval::Endpoint::latest).find("18.67±0.47"), std::string::npos);
}

TEST(Tables, VariantLabels) {
  EXPECT_EQ(variant_label("baseline"), "WO");
  EXPECT_EQ(variant_label("two_shot"), "2-Shot");
  EXPECT_EQ(variant_label("rehearsal"), "Rehearsal");
  EXPECT_EQ(variant_label("rehearsal:5"), "Rehearsal(K=5)");
  EXPECT_EQ(variant_label("semantic"), "Semantic");
}

TEST(SweepReport, ElagPlotPointsRecomputeFromAccuracies) {
  const auto r = small_sweep("recency_window(3)");
  const auto dir = temp_dir("sweep_report");
  const auto files = write_sweep_report(dir, r);
  EXPECT_TRUE(fs::exists(dir / "tables.txt"));
  EXPECT_TRUE(fs::exists(dir / "histograms.csv"));
  const auto svg = slurp(dir / "elag.svg");
  const std::regex point(R"re(data-series="([^"]*)" data-x="([^"]*)" data-y="([^"]*)")re");
  std::map<std::pair<std::string, double>, double> plotted;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), point); it != std::sregex_iterator(); ++it) {
    plotted[{(*it)[1], std::stod((*it)[2])}] = std::stod((*it)[3]);
  }
  ASSERT_EQ(plotted.size(), r.aggregates.size());
  for (const auto& a : r.aggregates) {
    const auto key = std::make_pair(variant_label(a.key.variant), static_cast<double>(a.key.length));
    ASSERT_TRUE(plotted.count(key)) << key.first << " " << key.second;
    EXPECT_NEAR(plotted[key], eval::elag(a.earliest_stats.mean, a.latest_stats.mean), 1e-12);
  }
  fs::remove_all(dir);
}

TEST(SweepReport, CsvsAgreeWithAggregates) {
  const auto r = small_sweep("oof_prone(0.3)");
  const auto dir = temp_dir("sweep_csv");
  write_sweep_report(dir, r);
  std::ifstream elag(dir / "elag_series.csv");
  std::string line;
  std::getline(elag, line);
  EXPECT_EQ(line, "variant,corpus,T,seeds,acc_earliest,acc_latest,elag");
  std::size_t rows = 0;
  while (std::getline(elag, line)) {
    std::stringstream ss(line);
    std::vector<std::string> f;
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 7u);
    EXPECT_NEAR(std::stod(f[4]) - std::stod(f[5]), std::stod(f[6]), 1e-12);
    ++rows;
  }
  EXPECT_EQ(rows, r.aggregates.size());
  // Histogram rows sum to the judged sample count per cell.
  std::ifstream hist(dir / "histograms.csv");
  std::getline(hist, line);
  std::size_t latest_total = 0;
  while (std::getline(hist, line)) {
    if (line.find(",latest,") == std::string::npos) continue;
    latest_total += std::stoul(line.substr(line.rfind(',') + 1));
  }
  std::size_t judged = 0;
  for (const auto& c : r.cells) judged += c.judgements.size();
  EXPECT_EQ(latest_total, judged);
  fs::remove_all(dir);
}

TEST(SweepReport, MixedLengthCorpusOmitsLinePlots) {
  eval::SweepPlan plan;
  plan.corpus_path = testing::data_path("italy.jsonl");
  plan.seeds = {0};
  client::ChatClient c(client::mock_endpoint("perfect"));
  const auto r = eval::run_sweep(plan, c);
  const auto dir = temp_dir("sweep_mixed");
  const auto files = write_sweep_report(dir, r);
  EXPECT_FALSE(fs::exists(dir / "elag.svg"));
  EXPECT_FALSE(files.notes.empty());
  EXPECT_TRUE(fs::exists(dir / "histogram_italy_T13_baseline.svg"));
  fs::remove_all(dir);
}

TEST(AnalysisReport, EmptyWrongGroupGetsANote) {
  std::mt19937_64 rng(8);
  const testing::TraceShape shape{2, 2, 16, 3, 4};
  AnalysisInput in;
  std::vector<signals::ActivationTrace> traces;
  std::vector<eval::ProbeJudgement> js;
  for (int i = 0; i < 5; ++i) {
    const auto sid = "a" + std::to_string(i);
    traces.push_back(testing::random_trace(rng, shape, sid));
    in.summaries.push_back(signals::summarize(traces.back()));
    auto j = testing::random_judgement(rng, sid, 3);
    j.answer_status = prompt::AnswerStatus::ok;
    j.latest_pos = {eval::PositionKind::candidate, {3}};
    j.latest_correct = true;
    js.push_back(j);
  }
  in.groups = signals::group_aggregate(in.summaries, js);
  in.match_rate = signals::layer_match_rate(traces, js);
  const auto dir = temp_dir("analysis");
  const auto files = write_analysis_report(dir, in);
  EXPECT_TRUE(fs::exists(dir / "correct_layer_attention.csv"));
  EXPECT_TRUE(fs::exists(dir / "correct_layer_attention.svg"));
  EXPECT_FALSE(fs::exists(dir / "wrong_layer_attention.csv"));
  ASSERT_FALSE(files.notes.empty());
  EXPECT_NE(files.notes.front().find("wrong group has no samples"), std::string::npos);
  // Heatmap cells carry the exact matrix values.
  const auto svg = slurp(dir / "correct_layer_attention.svg");
  const std::regex cell(R"re(data-row="(\d+)" data-col="(\d+)" data-value="([^"]*)")re");
  std::size_t n = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), cell); it != std::sregex_iterator(); ++it, ++n) {
    const auto r = std::stoul((*it)[1]), c = std::stoul((*it)[2]);
    EXPECT_EQ(std::stod((*it)[3]), in.groups.correct->layer_attention(r, c));
  }
  EXPECT_EQ(n, 2u * 3u);
  std::ifstream jsonl(dir / "summaries.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(jsonl, line); ++lines) EXPECT_TRUE(nlohmann::json::parse(line).is_object());
  EXPECT_EQ(lines, 5u);
  fs::remove_all(dir);
}

TEST(Svg, EscapesTitles) {
  const std::vector<std::string> labels{"1"};
  const std::vector<double> values{2.0};
  const auto svg = svg_bar_chart("a<b & c", "x", labels, values);
  EXPECT_NE(svg.find("a&lt;b &amp; c"), std::string::npos);
  EXPECT_NE(svg.find("data-value=\"2\""), std::string::npos);
}

}  // namespace
}  // namespace dki::report
