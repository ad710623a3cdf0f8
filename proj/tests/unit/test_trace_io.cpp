#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "dki/error.hpp"
#include "dki/signals/trace.hpp"
#include "oracle.hpp"

namespace dki::signals {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dki_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ActivationTrace sample(std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  auto tr = testing::random_trace(rng, testing::random_shape(rng), "rw-italy|baseline");
  tr.flags = {"divergent_answer"};
  tr.answer_text = R"({"cue":"c", "earliest":"a","latest":"b"})";
  return tr;
}

ErrorCode decode_error(std::vector<std::uint8_t> bytes) {
  try {
    decode_trace(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;
}

TEST(TraceIo, BinaryRoundTripIsExact) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto tr = sample(s);
    const auto bytes = encode_trace_binary(tr);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "DKITRACE");
    EXPECT_EQ(decode_trace(bytes), tr);
  }
}

TEST(TraceIo, TextRoundTripIsExact) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto tr = sample(s);
    const auto text = encode_trace_text(tr);
    EXPECT_EQ(nlohmann::json::parse(text)["format"], "dki-trace-text");
    EXPECT_EQ(decode_trace(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())), tr);
  }
}

TEST(TraceIo, StepLogitsSurvive) {
  auto tr = sample();
  tr.step_logits = {{{3, {1.5f, 0.25f}}}, {}};
  EXPECT_EQ(decode_trace(encode_trace_binary(tr)), tr);
  const auto text = encode_trace_text(tr);
  EXPECT_EQ(decode_trace(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())), tr);
}

TEST(TraceIo, FilesAutoDetectEncoding) {
  const auto dir = temp_dir("trace_files");
  const auto tr = sample();
  write_trace(dir / "a.trace", tr, TraceEncoding::binary);
  write_trace(dir / "a.json", tr, TraceEncoding::text);
  EXPECT_EQ(read_trace(dir / "a.trace"), tr);
  EXPECT_EQ(read_trace(dir / "a.json"), tr);
  try {
    read_trace(dir / "missing.trace");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
  fs::remove_all(dir);
}

TEST(TraceIo, CorruptionIsASchemaError) {
  const auto good = encode_trace_binary(sample());
  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  EXPECT_EQ(decode_error(truncated), ErrorCode::schema);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(decode_error(trailing), ErrorCode::schema);
  auto version = good;
  version[8] = 99;
  EXPECT_EQ(decode_error(version), ErrorCode::schema);
  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(decode_error(magic), ErrorCode::schema);
  EXPECT_EQ(decode_error({}), ErrorCode::schema);
}

TEST(TraceIo, TextShapeMismatchIsASchemaError) {
  auto j = nlohmann::json::parse(encode_trace_text(sample()));
  j["attention"].erase(0);
  const auto text = j.dump();
  try {
    decode_trace(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema);
  }
}

TEST(Manifest, RoundTripResolvesRelativePaths) {
  const auto dir = temp_dir("manifest");
  fs::create_directories(dir / "traces");
  std::vector<ManifestEntry> entries{{"a|baseline", "traces/a.trace"}, {"b|baseline", dir / "b.trace"}};
  write_manifest(dir / "manifest.json", entries);
  const auto back = read_manifest(dir / "manifest.json");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].sample_id, "a|baseline");
  EXPECT_EQ(back[0].path, dir / "traces/a.trace");
  EXPECT_EQ(back[1].path, dir / "b.trace");
  std::ofstream(dir / "bad.json") << R"({"traces":[{"path":"x"}]})";
  EXPECT_THROW(read_manifest(dir / "bad.json"), Error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dki::signals
