#include "dki/corpus/corpus_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "dki/error.hpp"

namespace dki {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Source source) noexcept {
  switch (source) {
    case Source::synthetic: return "synthetic";
    case Source::real_world: return "real_world";
    case Source::narrative: return "narrative";
  }
  return "synthetic";
}

std::optional<Source> parse_source(std::string_view text) noexcept {
  if (text == "synthetic") return Source::synthetic;
  if (text == "real_world") return Source::real_world;
  if (text == "narrative") return Source::narrative;
  return std::nullopt;
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse_error, fmt::format("line {}: {}", line, what));
}

DkiTrajectory parse_record(const std::string& text, std::size_t line, std::size_t ordinal, Source default_source) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(line, fmt::format("malformed record '{}': {}", text.size() > 60 ? text.substr(0, 60) + "..." : text,
                           e.what()));
  }
  if (!j.is_object()) fail(line, "record is not a JSON object");

  DkiTrajectory t;
  t.source = default_source;
  if (auto it = j.find("source"); it != j.end()) {
    if (!it->is_string()) fail(line, "field 'source' must be a string");
    auto s = parse_source(it->get<std::string>());
    if (!s) fail(line, "unknown source '" + it->get<std::string>() + "'");
    t.source = *s;
  }
  if (auto it = j.find("id"); it != j.end()) {
    if (!it->is_string()) fail(line, "field 'id' must be a string");
    t.id = it->get<std::string>();
  } else {
    t.id = fmt::format("rw-{:04d}", ordinal);
  }
  auto cue = j.find("cue");
  if (cue == j.end() || !cue->is_string()) fail(line, "missing string field 'cue'");
  t.cue = cue->get<std::string>();
  if (t.cue.empty()) fail(line, "empty cue");

  auto values = j.find("values");
  if (values == j.end() || !values->is_array()) fail(line, "missing array field 'values'");
  if (values->empty()) fail(line, "'values' must hold at least one value");
  for (const auto& v : *values) {
    if (!v.is_string()) fail(line, "non-string entry in 'values'");
    t.values.push_back(v.get<std::string>());
  }
  if (auto it = j.find("document"); it != j.end()) {
    if (!it->is_string()) fail(line, "field 'document' must be a string");
    t.document = it->get<std::string>();
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "id" && key != "cue" && key != "values" && key != "source" && key != "document") {
      fail(line, "unknown field '" + key + "'");
    }
  }
  return t;
}

}  // namespace

std::vector<DkiTrajectory> read_corpus(std::istream& in, Source default_source) {
  std::vector<DkiTrajectory> out;
  std::unordered_set<std::string> cues;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    auto t = parse_record(text, line, out.size(), default_source);
    if (!cues.insert(t.cue).second) {
      throw Error(ErrorCode::duplicate_cue, fmt::format("line {}: duplicate cue '{}'", line, t.cue));
    }
    if (!ids.insert(t.id).second) fail(line, "duplicate id '" + t.id + "'");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<DkiTrajectory> load_real_world(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open corpus file " + path.string());
  return read_corpus(in, Source::real_world);
}

std::string serialize_record(const DkiTrajectory& t) {
  ordered_json j;
  j["id"] = t.id;
  j["cue"] = t.cue;
  j["values"] = t.values;
  j["source"] = std::string(to_string(t.source));
  if (t.document) j["document"] = *t.document;
  return j.dump();
}

void write_corpus(std::ostream& out, std::span<const DkiTrajectory> corpus) {
  for (const auto& t : corpus) out << serialize_record(t) << '\n';
}

void write_corpus_file(const std::filesystem::path& path, std::span<const DkiTrajectory> corpus) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write corpus file " + path.string());
  write_corpus(out, corpus);
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace dki
