#include <gtest/gtest.h>

#include <random>

#include "dki/corpus/generator.hpp"
#include "dki/error.hpp"
#include "dki/prompting/prompt.hpp"
#include "fixtures.hpp"

namespace dki {
namespace {

using prompt::PromptVariant;
using prompt::VariantKind;

std::vector<std::string> block_lines(const prompt::ProbePrompt& p) {
  const auto block = p.text.substr(p.record_block.begin, p.record_block.end - p.record_block.begin);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < block.size()) {
    auto nl = block.find('\n', pos);
    if (nl == std::string::npos) nl = block.size();
    lines.push_back(block.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

DkiTrajectory with_document(DkiTrajectory t, std::string doc) {
  t.source = Source::narrative;
  t.document = std::move(doc);
  return t;
}

TEST(VariantNames, RoundTripThroughParse) {
  for (const auto& v : prompt::standard_variants()) {
    auto parsed = prompt::parse_variant(prompt::variant_name(v));
    ASSERT_TRUE(parsed.has_value()) << prompt::variant_name(v);
    EXPECT_EQ(*parsed, v);
  }
  EXPECT_EQ(prompt::variant_name({VariantKind::rehearsal, 5}), "rehearsal:5");
  EXPECT_EQ(prompt::parse_variant("rehearsal:5")->rehearsal_k, 5u);
  EXPECT_FALSE(prompt::parse_variant("rehearsal:0"));
  EXPECT_FALSE(prompt::parse_variant("index:2"));
  EXPECT_FALSE(prompt::parse_variant("bogus"));
  EXPECT_EQ(prompt::standard_variants().size(), 8u);
  EXPECT_EQ(prompt::standard_variants().front().kind, VariantKind::baseline);
}

TEST(ProbePrompt, ItalyBaselineHasThirteenRecordLines) {
  const auto p = prompt::render_probe_prompt(testing::italy(), {VariantKind::baseline});
  const auto lines = block_lines(p);
  ASSERT_EQ(lines.size(), 15u);
  EXPECT_EQ(lines.front(), "START:");
  EXPECT_EQ(lines.back(), "END");
  EXPECT_EQ(lines[1], "President of Italy:Alcide De Gasperi");
  EXPECT_EQ(lines[13], "President of Italy:Sergio Mattarella");
  EXPECT_NE(p.text.find(R"(CUE (JSON array): ["President of Italy"])"), std::string::npos);
  EXPECT_EQ(p.trajectory_id, "rw-italy");
}

TEST(ProbePrompt, IndexVariantNumbersRecords) {
  const auto p = prompt::render_probe_prompt(testing::italy(), {VariantKind::index});
  const auto lines = block_lines(p);
  EXPECT_EQ(lines[1], "1. President of Italy:Alcide De Gasperi");
  EXPECT_EQ(lines[13], "13. President of Italy:Sergio Mattarella");
  const auto records = prompt::extract_records(p.text);
  EXPECT_EQ(records, prompt::records_of(testing::italy()));
}

TEST(ProbePrompt, RehearsalAddsOnlyAPreamble) {
  const auto base = prompt::render_probe_prompt(testing::italy(), {VariantKind::baseline});
  const auto k3 = prompt::render_probe_prompt(testing::italy(), {VariantKind::rehearsal, 3});
  const auto k1 = prompt::render_probe_prompt(testing::italy(), {VariantKind::rehearsal, 1});
  const auto k12 = prompt::render_probe_prompt(testing::italy(), {VariantKind::rehearsal, 12});
  EXPECT_NE(k3.text.find("Rehearse each new cue:value pair three times"), std::string::npos);
  EXPECT_NE(k1.text.find("pair once when"), std::string::npos);
  EXPECT_NE(k12.text.find("pair 12 times"), std::string::npos);
  EXPECT_EQ(block_lines(k3), block_lines(base));
}

TEST(ProbePrompt, EveryVariantKeepsTheRecordBlock) {
  const auto base = prompt::render_probe_prompt(testing::italy(), {VariantKind::baseline});
  for (const auto& v : prompt::standard_variants()) {
    const auto p = prompt::render_probe_prompt(testing::italy(), v);
    EXPECT_EQ(prompt::extract_records(p.text), prompt::records_of(testing::italy())) << prompt::variant_name(v);
    if (v.kind != VariantKind::index) {
      EXPECT_EQ(block_lines(p), block_lines(base)) << prompt::variant_name(v);
    }
  }
}

TEST(ProbePrompt, TwoShotExamplesPrecedeTheRealBlock) {
  const auto p = prompt::render_probe_prompt(testing::italy(), {VariantKind::two_shot});
  EXPECT_NE(p.text.find("EXAMPLE 1"), std::string::npos);
  EXPECT_NE(p.text.find("EXAMPLE 2"), std::string::npos);
  EXPECT_GT(p.record_block.begin, p.text.find("EXAMPLE 2"));
}

TEST(ProbePrompt, SnapshotsAreStable) {
  for (const auto& v : prompt::standard_variants()) {
    const auto p = prompt::render_probe_prompt(testing::italy(), v);
    EXPECT_TRUE(testing::matches_snapshot("italy_" + prompt::variant_name(v) + ".txt", p.text));
  }
  EXPECT_TRUE(testing::matches_snapshot("italy_rewrite_request.txt",
                                        prompt::render_narrative_rewrite_request(testing::italy()).text));
}

TEST(ProbePrompt, TwoUpdateTrajectory) {
  DkiTrajectory t{"rw-short", "Capital of Testland", {"Oldtown", "Newtown"}, Source::real_world, std::nullopt};
  const auto p = prompt::render_probe_prompt(t, {VariantKind::baseline});
  EXPECT_EQ(block_lines(p), (std::vector<std::string>{"START:", "Capital of Testland:Oldtown",
                                                      "Capital of Testland:Newtown", "END"}));
}

TEST(ProbePrompt, SyntheticNineUpdateShape) {
  GenerationConfig config;
  config.updates = 9;
  config.corpus_size = 1;
  const auto t = generate_synthetic_dki(config, 0);
  const auto p = prompt::render_probe_prompt(t, {VariantKind::baseline});
  const auto lines = block_lines(p);
  ASSERT_EQ(lines.size(), 11u);
  for (std::size_t i = 1; i <= 9; ++i) {
    EXPECT_EQ(lines[i].size(), 8u + 1u + 8u);
    EXPECT_EQ(lines[i].substr(0, 9), t.cue + ":");
  }
}

TEST(ProbePrompt, RejectsUnrenderableInput) {
  auto t = testing::italy();
  EXPECT_THROW(
      {
        try {
          prompt::render_probe_prompt(t, {VariantKind::narrative});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::unsupported_variant);
          throw;
        }
      },
      Error);
  auto expect_code = [](auto&& fn, ErrorCode code) {
    try {
      fn();
      ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  expect_code([&] { prompt::render_probe_prompt(t, {VariantKind::rehearsal, 0}); }, ErrorCode::invalid_config);
  auto colon = t;
  colon.cue = "a:b";
  expect_code([&] { prompt::render_probe_prompt(colon, {}); }, ErrorCode::invalid_config);
  auto newline = t;
  newline.values[3] = "two\nlines";
  expect_code([&] { prompt::render_probe_prompt(newline, {}); }, ErrorCode::invalid_config);
  auto empty = t;
  empty.values.clear();
  expect_code([&] { prompt::render_probe_prompt(empty, {}); }, ErrorCode::invalid_config);
  expect_code([&] { prompt::render_narrative_probe(t); }, ErrorCode::invalid_config);
}

TEST(ExtractRecords, UsesLastStartMarker) {
  const std::string text = "START:\nx:1\nEND\nnoise\nSTART:\na:b\nc:d:e\nEND\ntrailer";
  const auto r = prompt::extract_records(text);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], (prompt::Record{"a", "b"}));
  EXPECT_EQ(r[1], (prompt::Record{"c", "d:e"}));
}

TEST(ExtractRecords, KeepsPrefixesUnlessAllSequential) {
  const auto r = prompt::extract_records("START:\n1. a:b\n3. a:c\nEND\n");
  EXPECT_EQ(r[0].cue, "1. a");
  EXPECT_EQ(r[1].cue, "3. a");
  EXPECT_TRUE(prompt::extract_records("START:\nEND\n").empty());
}

TEST(ExtractRecords, Errors) {
  auto code_of = [](std::string_view text) {
    try {
      prompt::extract_records(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  EXPECT_EQ(code_of("a:b\nEND\n"), ErrorCode::missing_markers);
  EXPECT_EQ(code_of("START:\na:b\n"), ErrorCode::missing_markers);
  EXPECT_EQ(code_of("START:\na:b\nno separator\nEND\n"), ErrorCode::malformed_line);
}

TEST(ExtractRecords, RandomSyntheticRoundTrip) {
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < 100; ++i) {
    GenerationConfig config;
    config.updates = 1 + rng() % 64;
    config.corpus_size = 1;
    config.seed = rng();
    const auto t = generate_synthetic_dki(config, 0);
    const auto& v = prompt::standard_variants()[rng() % prompt::standard_variants().size()];
    EXPECT_EQ(prompt::extract_records(prompt::render_probe_prompt(t, v).text), prompt::records_of(t));
  }
}

TEST(Narrative, RewriteRequestListsValuesInOrder) {
  const auto p = prompt::render_narrative_rewrite_request(testing::italy());
  const auto lines = block_lines(p);
  ASSERT_EQ(lines.size(), 15u);
  EXPECT_EQ(lines[1], "1. President of Italy:Alcide De Gasperi");
  EXPECT_NE(p.text.find("(13 in total)"), std::string::npos);
  std::size_t cursor = 0;
  for (const auto& v : testing::italy().values) {
    const auto at = p.text.find(v, cursor);
    ASSERT_NE(at, std::string::npos) << v;
    cursor = at + v.size();
  }
}

TEST(Narrative, ProbeEmbedsDocumentBetweenMarkers) {
  DkiTrajectory t{"rw-short", "Capital of Testland", {"Oldtown", "Newtown"}, Source::real_world, std::nullopt};
  const auto n = with_document(t, "The capital was Oldtown.\n\nLater it moved to Newtown.\n\n");
  const auto p = prompt::render_narrative_probe(n);
  const auto lines = block_lines(p);
  EXPECT_EQ(lines, (std::vector<std::string>{"START:", "The capital was Oldtown.", "", "Later it moved to Newtown.",
                                             "END"}));
  EXPECT_EQ(p.variant.kind, VariantKind::narrative);
}

TEST(Narrative, CheckFindsMissingRepeatedAndOutOfOrder) {
  DkiTrajectory t{"x", "c", {"alpha", "beta", "gamma"}, Source::real_world, std::nullopt};
  EXPECT_TRUE(prompt::check_narrative("first alpha, then beta, now gamma", t).ok);
  const auto missing = prompt::check_narrative("alpha then gamma", t);
  EXPECT_FALSE(missing.ok);
  EXPECT_EQ(missing.missing, std::vector<std::size_t>{1});
  const auto repeated = prompt::check_narrative("alpha beta alpha gamma", t);
  EXPECT_EQ(repeated.repeated, std::vector<std::size_t>{0});
  const auto swapped = prompt::check_narrative("alpha gamma beta", t);
  EXPECT_EQ(swapped.out_of_order, std::vector<std::size_t>{2});
}

}  // namespace
}  // namespace dki
