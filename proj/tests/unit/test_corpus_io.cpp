#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "dki/corpus/corpus_io.hpp"
#include "dki/corpus/generator.hpp"
#include "dki/error.hpp"
#include "fixtures.hpp"

namespace dki {
namespace {

std::vector<DkiTrajectory> parse(const std::string& text) {
  std::istringstream in(text);
  return read_corpus(in);
}

void expect_error(const std::string& text, ErrorCode code, const std::string& fragment) {
  try {
    parse(text);
    ADD_FAILURE() << "no error for: " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(CorpusIo, LoadsItalyFixtureInOrder) {
  const auto corpus = load_real_world(testing::data_path("italy.jsonl"));
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0], testing::italy());
  EXPECT_EQ(corpus[0].values[0], "Alcide De Gasperi");
  EXPECT_EQ(corpus[0].values[12], "Sergio Mattarella");
  EXPECT_EQ(corpus[1].source, Source::real_world);
  EXPECT_EQ(corpus_stats(corpus).min_length, 2u);
}

TEST(CorpusIo, MalformedLineNamesTheLine) {
  expect_error("{\"cue\":\"a\",\"values\":[\"x\"]}\n\ncue_without_colon\n", ErrorCode::parse_error, "line 3");
}

TEST(CorpusIo, DuplicateCueIsRejected) {
  expect_error("{\"cue\":\"a\",\"values\":[\"x\"]}\n{\"cue\":\"a\",\"values\":[\"y\"]}\n", ErrorCode::duplicate_cue,
               "line 2");
}

TEST(CorpusIo, FieldValidation) {
  expect_error("{\"values\":[\"x\"]}", ErrorCode::parse_error, "cue");
  expect_error("{\"cue\":\"a\",\"values\":[]}", ErrorCode::parse_error, "at least one");
  expect_error("{\"cue\":\"a\",\"values\":[1]}", ErrorCode::parse_error, "non-string");
  expect_error("{\"cue\":\"a\",\"values\":[\"x\"],\"extra\":1}", ErrorCode::parse_error, "unknown field");
  expect_error("{\"cue\":\"a\",\"values\":[\"x\"],\"source\":\"mars\"}", ErrorCode::parse_error, "unknown source");
  expect_error("[1,2]", ErrorCode::parse_error, "not a JSON object");
  expect_error("{\"id\":\"x\",\"cue\":\"a\",\"values\":[\"x\"]}\n{\"id\":\"x\",\"cue\":\"b\",\"values\":[\"x\"]}",
               ErrorCode::parse_error, "duplicate id");
}

TEST(CorpusIo, MissingIdGetsOrdinalAndDuplicateValuesAreKept) {
  const auto corpus = parse("{\"cue\":\"a\",\"values\":[\"x\",\"y\",\"x\"]}\r\n{\"cue\":\"b\",\"values\":[\"z\"]}\n");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].id, "rw-0000");
  EXPECT_EQ(corpus[1].id, "rw-0001");
  EXPECT_EQ(corpus[0].values, (std::vector<std::string>{"x", "y", "x"}));
}

TEST(CorpusIo, NarrativeDocumentRoundTrips) {
  DkiTrajectory t = testing::italy();
  t.source = Source::narrative;
  t.document = "In 1946 \"Alcide De Gasperi\"\nled.";
  const auto back = parse(serialize_record(t));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], t);
}

TEST(CorpusIo, SyntheticCorpusRoundTripsByteForByte) {
  GenerationConfig c;
  c.updates = 12;
  c.corpus_size = 40;
  c.seed = 11;
  const auto corpus = generate_corpus(c);
  std::ostringstream first;
  write_corpus(first, corpus);
  const auto back = parse(first.str());
  EXPECT_EQ(back, corpus);
  std::ostringstream second;
  write_corpus(second, back);
  EXPECT_EQ(first.str(), second.str());
}

TEST(CorpusIo, MissingFileIsIoError) {
  try {
    load_real_world("/nonexistent/corpus.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
}

}  // namespace
}  // namespace dki
