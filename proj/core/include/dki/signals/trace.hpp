#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dki::signals {

inline constexpr std::uint32_t kTraceSchemaVersion = 1;

struct ModelMeta {
  std::size_t layers = 0;   // L
  std::size_t heads = 0;    // H
  std::size_t seq_len = 0;  // M
  std::size_t hidden = 0;   // D
  std::size_t vocab = 0;    // |V|
  std::string model_id;

  bool operator==(const ModelMeta&) const = default;
};

// Half-open token range [begin, end) in the full sequence.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  bool operator==(const TokenSpan&) const = default;
};

struct LogitEntry {
  float logit = 0.0f;  // raw z_v
  float prob = 0.0f;   // softmax over the full vocabulary

  bool operator==(const LogitEntry&) const = default;
};

using SparseLogits = std::map<std::int32_t, LogitEntry>;

// Per-sample activation capture at the answer position. Candidate index t is
// 0-based here (t = 0 is the earliest value). Floats are stored as 32-bit and
// all scoring accumulates in double.
struct ActivationTrace {
  std::uint32_t schema_version = kTraceSchemaVersion;
  std::string sample_id;
  ModelMeta meta;
  std::vector<TokenSpan> spans;  // one per candidate value, in order
  std::size_t answer_pos = 0;    // p_ans

  std::vector<float> attention;          // [L][H][M], row at p_ans
  std::vector<float> hidden_answer;      // [L][D]
  std::vector<float> hidden_candidates;  // [L][S][D], S = sum of span sizes
  SparseLogits answer_logits;            // next-token distribution before the answer
  std::vector<std::vector<std::int32_t>> candidate_vocab;  // token ids per candidate

  std::map<std::string, std::string> decisions;
  std::vector<std::string> flags;  // e.g. "parse_failed", "divergent_answer"
  std::optional<std::string> answer_text;
  // Reserved: logits at each generation step; empty unless the extractor
  // records them.
  std::vector<SparseLogits> step_logits;

  std::size_t candidates() const noexcept { return spans.size(); }
  std::size_t span_tokens() const noexcept;
  std::size_t span_offset(std::size_t t) const;

  std::span<const float> attention_row(std::size_t l, std::size_t h) const;
  std::span<const float> answer_state(std::size_t l) const;
  std::span<const float> candidate_token_state(std::size_t l, std::size_t t, std::size_t k) const;

  bool operator==(const ActivationTrace&) const = default;
};

enum class TraceEncoding { binary, text };

// Binary: "DKITRACE", u32 schema, u32 header bytes, JSON header, then
// little-endian f32 sections (see docs/trace_format.md). Text: one JSON object.
void write_trace(const std::filesystem::path& path, const ActivationTrace& trace,
                 TraceEncoding encoding = TraceEncoding::binary);
std::vector<std::uint8_t> encode_trace_binary(const ActivationTrace& trace);
std::string encode_trace_text(const ActivationTrace& trace);

// Detects the encoding from the first bytes.
ActivationTrace read_trace(const std::filesystem::path& path);
ActivationTrace decode_trace(std::span<const std::uint8_t> bytes);

struct ManifestEntry {
  std::string sample_id;
  std::filesystem::path path;  // resolved against the manifest directory
};

// {"traces":[{"sample_id":"...","path":"..."}]}
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

}  // namespace dki::signals
