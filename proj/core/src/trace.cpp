#include "dki/signals/trace.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dki/error.hpp"

namespace dki::signals {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr char kMagic[8] = {'D', 'K', 'I', 'T', 'R', 'A', 'C', 'E'};
constexpr std::string_view kTextFormat = "dki-trace-text";

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::schema, "trace: " + what); }

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f32s(const std::vector<float>& v) {
    for (float x : v) f32(x);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) schema_error(fmt::format("truncated {} at byte {}", what, pos_));
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::vector<float> f32s(std::size_t n, const char* what) {
    if (n > (in_.size() - pos_) / 4) schema_error(fmt::format("truncated {} at byte {}", what, pos_));
    std::vector<float> v(n);
    for (auto& x : v) x = f32(what);
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const noexcept { return pos_ == in_.size(); }
  std::size_t pos() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

ordered_json header_json(const ActivationTrace& t) {
  ordered_json h;
  h["schema_version"] = t.schema_version;
  h["sample_id"] = t.sample_id;
  h["model_meta"] = {{"layers", t.meta.layers}, {"heads", t.meta.heads},   {"seq_len", t.meta.seq_len},
                     {"hidden", t.meta.hidden}, {"vocab", t.meta.vocab}, {"model_id", t.meta.model_id}};
  auto spans = ordered_json::array();
  for (const auto& s : t.spans) spans.push_back({s.begin, s.end});
  h["spans"] = std::move(spans);
  h["answer_pos"] = t.answer_pos;
  h["candidate_vocab"] = t.candidate_vocab;
  h["decisions"] = t.decisions;
  h["flags"] = t.flags;
  if (t.answer_text) h["answer_text"] = *t.answer_text;
  return h;
}

template <typename J>
std::size_t get_size(const J& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned()) schema_error(fmt::format("missing or invalid '{}'", key));
  return j.at(key).template get<std::size_t>();
}

void parse_header(const json& h, ActivationTrace& t) {
  if (!h.is_object()) schema_error("header is not an object");
  try {
    t.schema_version = h.at("schema_version").get<std::uint32_t>();
    if (t.schema_version != kTraceSchemaVersion)
      schema_error(fmt::format("unsupported schema version {} (expected {})", t.schema_version, kTraceSchemaVersion));
    t.sample_id = h.at("sample_id").get<std::string>();
    const auto& m = h.at("model_meta");
    t.meta.layers = get_size(m, "layers");
    t.meta.heads = get_size(m, "heads");
    t.meta.seq_len = get_size(m, "seq_len");
    t.meta.hidden = get_size(m, "hidden");
    t.meta.vocab = get_size(m, "vocab");
    t.meta.model_id = m.value("model_id", std::string{});
    t.spans.clear();
    for (const auto& s : h.at("spans")) {
      if (!s.is_array() || s.size() != 2) schema_error("span entries must be [begin, end]");
      t.spans.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
    }
    t.answer_pos = get_size(h, "answer_pos");
    t.candidate_vocab = h.at("candidate_vocab").get<std::vector<std::vector<std::int32_t>>>();
    t.decisions = h.value("decisions", std::map<std::string, std::string>{});
    t.flags = h.value("flags", std::vector<std::string>{});
    if (h.contains("answer_text")) t.answer_text = h.at("answer_text").get<std::string>();
  } catch (const json::exception& e) {
    schema_error(e.what());
  }
}

std::size_t checked_product(std::initializer_list<std::size_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > SIZE_MAX / d) schema_error("section size overflows");
    n *= d;
  }
  return n;
}

void write_logits(Writer& w, const SparseLogits& logits) {
  w.u32(static_cast<std::uint32_t>(logits.size()));
  for (const auto& [id, e] : logits) {
    w.i32(id);
    w.f32(e.logit);
    w.f32(e.prob);
  }
}

SparseLogits read_logits(Reader& r) {
  SparseLogits out;
  const auto n = r.u32("logit count");
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto id = r.i32("logit id");
    LogitEntry e;
    e.logit = r.f32("logit");
    e.prob = r.f32("probability");
    if (!out.emplace(id, e).second) schema_error(fmt::format("duplicate logit id {}", id));
  }
  return out;
}

ordered_json logits_json(const SparseLogits& logits) {
  auto arr = ordered_json::array();
  for (const auto& [id, e] : logits) arr.push_back({id, e.logit, e.prob});
  return arr;
}

SparseLogits logits_from_json(const json& arr) {
  SparseLogits out;
  for (const auto& row : arr) {
    if (!row.is_array() || row.size() != 3) schema_error("logit entries must be [id, logit, prob]");
    const auto id = row[0].get<std::int32_t>();
    if (!out.emplace(id, LogitEntry{row[1].get<float>(), row[2].get<float>()}).second)
      schema_error(fmt::format("duplicate logit id {}", id));
  }
  return out;
}

std::vector<float> floats_from_json(const json& j, std::size_t expected, const char* what) {
  if (!j.is_array()) schema_error(fmt::format("'{}' must be an array", what));
  if (j.size() != expected) schema_error(fmt::format("'{}' has {} values, expected {}", what, j.size(), expected));
  std::vector<float> v;
  v.reserve(expected);
  for (const auto& x : j) {
    if (!x.is_number()) schema_error(fmt::format("'{}' contains a non-number", what));
    v.push_back(x.get<float>());
  }
  return v;
}

void check_sections(const ActivationTrace& t) {
  const auto& m = t.meta;
  if (t.attention.size() != checked_product({m.layers, m.heads, m.seq_len}))
    schema_error("attention section size does not match model_meta");
  if (t.hidden_answer.size() != checked_product({m.layers, m.hidden}))
    schema_error("hidden_answer section size does not match model_meta");
  if (t.hidden_candidates.size() != checked_product({m.layers, t.span_tokens(), m.hidden}))
    schema_error("hidden_candidates section size does not match model_meta and spans");
}

}  // namespace

std::size_t ActivationTrace::span_tokens() const noexcept {
  std::size_t n = 0;
  for (const auto& s : spans) n += s.size();
  return n;
}

std::size_t ActivationTrace::span_offset(std::size_t t) const {
  if (t >= spans.size()) throw Error(ErrorCode::invalid_config, fmt::format("candidate {} out of range", t));
  std::size_t off = 0;
  for (std::size_t i = 0; i < t; ++i) off += spans[i].size();
  return off;
}

std::span<const float> ActivationTrace::attention_row(std::size_t l, std::size_t h) const {
  if (l >= meta.layers || h >= meta.heads)
    throw Error(ErrorCode::invalid_config, fmt::format("attention index ({}, {}) out of range", l, h));
  return std::span<const float>(attention).subspan((l * meta.heads + h) * meta.seq_len, meta.seq_len);
}

std::span<const float> ActivationTrace::answer_state(std::size_t l) const {
  if (l >= meta.layers) throw Error(ErrorCode::invalid_config, fmt::format("layer {} out of range", l));
  return std::span<const float>(hidden_answer).subspan(l * meta.hidden, meta.hidden);
}

std::span<const float> ActivationTrace::candidate_token_state(std::size_t l, std::size_t t, std::size_t k) const {
  if (l >= meta.layers) throw Error(ErrorCode::invalid_config, fmt::format("layer {} out of range", l));
  if (k >= spans.at(t).size()) throw Error(ErrorCode::invalid_config, fmt::format("token {} outside span {}", k, t));
  const std::size_t row = l * span_tokens() + span_offset(t) + k;
  return std::span<const float>(hidden_candidates).subspan(row * meta.hidden, meta.hidden);
}

std::vector<std::uint8_t> encode_trace_binary(const ActivationTrace& trace) {
  check_sections(trace);
  const std::string header = header_json(trace).dump();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(trace.schema_version);
  w.u32(static_cast<std::uint32_t>(header.size()));
  w.bytes(header.data(), header.size());
  w.f32s(trace.attention);
  w.f32s(trace.hidden_answer);
  w.f32s(trace.hidden_candidates);
  write_logits(w, trace.answer_logits);
  w.u32(static_cast<std::uint32_t>(trace.step_logits.size()));
  for (const auto& step : trace.step_logits) write_logits(w, step);
  return w.take();
}

std::string encode_trace_text(const ActivationTrace& trace) {
  check_sections(trace);
  ordered_json j;
  j["format"] = kTextFormat;
  j.update(header_json(trace));
  j["attention"] = trace.attention;
  j["hidden_answer"] = trace.hidden_answer;
  j["hidden_candidates"] = trace.hidden_candidates;
  j["answer_logits"] = logits_json(trace.answer_logits);
  auto steps = ordered_json::array();
  for (const auto& s : trace.step_logits) steps.push_back(logits_json(s));
  j["step_logits"] = std::move(steps);
  return j.dump(1) + "\n";
}

ActivationTrace decode_trace(std::span<const std::uint8_t> bytes) {
  ActivationTrace t;
  if (bytes.size() >= sizeof kMagic && std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0) {
    Reader r(bytes.subspan(sizeof kMagic));
    const auto version = r.u32("schema version");
    if (version != kTraceSchemaVersion)
      schema_error(fmt::format("unsupported schema version {} (expected {})", version, kTraceSchemaVersion));
    const auto header_len = r.u32("header length");
    json header;
    try {
      header = json::parse(r.str(header_len, "header"));
    } catch (const json::exception& e) {
      schema_error(std::string("header: ") + e.what());
    }
    parse_header(header, t);
    if (t.schema_version != version) schema_error("header schema version disagrees with preamble");
    const auto& m = t.meta;
    t.attention = r.f32s(checked_product({m.layers, m.heads, m.seq_len}), "attention");
    t.hidden_answer = r.f32s(checked_product({m.layers, m.hidden}), "hidden_answer");
    t.hidden_candidates = r.f32s(checked_product({m.layers, t.span_tokens(), m.hidden}), "hidden_candidates");
    t.answer_logits = read_logits(r);
    const auto steps = r.u32("step count");
    for (std::uint32_t i = 0; i < steps; ++i) t.step_logits.push_back(read_logits(r));
    if (!r.done()) schema_error(fmt::format("{} trailing bytes", bytes.size() - sizeof kMagic - r.pos()));
    return t;
  }

  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception&) {
    schema_error("neither a binary trace nor a JSON text trace");
  }
  if (!j.is_object() || j.value("format", std::string{}) != kTextFormat) schema_error("text trace lacks format tag");
  parse_header(j, t);
  const auto& m = t.meta;
  try {
    t.attention = floats_from_json(j.at("attention"), checked_product({m.layers, m.heads, m.seq_len}), "attention");
    t.hidden_answer = floats_from_json(j.at("hidden_answer"), checked_product({m.layers, m.hidden}), "hidden_answer");
    t.hidden_candidates = floats_from_json(j.at("hidden_candidates"),
                                           checked_product({m.layers, t.span_tokens(), m.hidden}), "hidden_candidates");
    t.answer_logits = logits_from_json(j.at("answer_logits"));
    for (const auto& s : j.value("step_logits", json::array())) t.step_logits.push_back(logits_from_json(s));
  } catch (const json::exception& e) {
    schema_error(e.what());
  }
  return t;
}

void write_trace(const std::filesystem::path& path, const ActivationTrace& trace, TraceEncoding encoding) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  if (encoding == TraceEncoding::binary) {
    const auto bytes = encode_trace_binary(trace);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  } else {
    out << encode_trace_text(trace);
  }
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

ActivationTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_trace(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("traces") || !j.at("traces").is_array())
    throw Error(ErrorCode::schema, path.string() + ": manifest needs a 'traces' array");
  std::vector<ManifestEntry> out;
  const auto base = path.parent_path();
  for (const auto& e : j.at("traces")) {
    if (!e.is_object() || !e.contains("sample_id") || !e.contains("path"))
      throw Error(ErrorCode::schema, path.string() + ": manifest entries need sample_id and path");
    std::filesystem::path p = e.at("path").get<std::string>();
    out.push_back({e.at("sample_id").get<std::string>(), p.is_absolute() ? p : base / p});
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  ordered_json j;
  auto arr = ordered_json::array();
  const auto base = path.parent_path();
  for (const auto& e : entries) {
    auto rel = e.path.is_absolute() || base.empty() ? e.path : e.path.lexically_relative(base);
    if (rel.empty()) rel = e.path;
    arr.push_back({{"sample_id", e.sample_id}, {"path", rel.generic_string()}});
  }
  j["traces"] = std::move(arr);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace dki::signals
