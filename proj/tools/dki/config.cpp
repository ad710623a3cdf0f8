#include "config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "dki/error.hpp"
#include "dki/prompting/prompt.hpp"

namespace dki::cli {

using nlohmann::json;

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::pool_exhausted:
    case ErrorCode::unsupported_variant:
    case ErrorCode::config_mismatch:
      return kConfig;
    case ErrorCode::io:
      return kIo;
    case ErrorCode::network_exhausted:
    case ErrorCode::auth:
    case ErrorCode::provider:
      return kEndpoint;
    case ErrorCode::parse_error:
    case ErrorCode::duplicate_cue:
    case ErrorCode::empty_corpus:
    case ErrorCode::missing_markers:
    case ErrorCode::malformed_line:
    case ErrorCode::mixed_t:
    case ErrorCode::empty_input:
    case ErrorCode::empty_span:
    case ErrorCode::zero_vector:
    case ErrorCode::missing_logit:
    case ErrorCode::pairing_mismatch:
    case ErrorCode::shape_mismatch:
    case ErrorCode::schema:
      return kValidation;
  }
  return kInternal;
}

namespace {

client::EndpointConfig endpoint_from_json(const json& j, const std::filesystem::path& base) {
  if (j.is_string()) {
    std::filesystem::path p = j.get<std::string>();
    return client::load_endpoint_config(p.is_absolute() ? p : base / p);
  }
  return client::parse_endpoint_config(j.dump());
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path = p;
  return path.is_absolute() ? path : base / path;
}

}  // namespace

void apply_config_file(RunConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::invalid_config, path.string() + ": not a JSON object");

  static const std::set<std::string> known = {
      "lengths", "count",    "seeds",          "word_list",  "word_length", "corpus",
      "variants", "endpoint", "match",         "include_flagged_narratives", "request_budget",
      "cache",   "template_version", "out",   "judgements", "manifest",    "traces"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw Error(ErrorCode::invalid_config, path.string() + ": unknown key '" + k + "'");

  // Relative paths in the file resolve against the file's directory.
  const auto base = path.parent_path();
  try {
    if (j.contains("lengths")) c.lengths = j.at("lengths").get<std::vector<std::size_t>>();
    if (j.contains("count")) c.count = j.at("count").get<std::size_t>();
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("word_list")) c.word_list = resolve(base, j.at("word_list").get<std::string>());
    if (j.contains("word_length")) c.word_length = j.at("word_length").get<std::size_t>();
    if (j.contains("corpus")) c.corpus = resolve(base, j.at("corpus").get<std::string>());
    if (j.contains("variants")) c.variants = j.at("variants").get<std::vector<std::string>>();
    if (j.contains("endpoint")) c.endpoint = endpoint_from_json(j.at("endpoint"), base);
    if (j.contains("match")) {
      const auto m = j.at("match").get<std::string>();
      if (m == "strict") c.match = eval::MatchMode::strict;
      else if (m == "lenient") c.match = eval::MatchMode::lenient;
      else throw Error(ErrorCode::invalid_config, "match must be 'strict' or 'lenient'");
    }
    if (j.contains("include_flagged_narratives"))
      c.include_flagged_narratives = j.at("include_flagged_narratives").get<bool>();
    if (j.contains("request_budget")) c.request_budget = j.at("request_budget").get<std::size_t>();
    if (j.contains("cache")) c.cache_dir = resolve(base, j.at("cache").get<std::string>());
    if (j.contains("template_version")) c.template_version = j.at("template_version").get<std::string>();
    if (j.contains("out")) c.out = resolve(base, j.at("out").get<std::string>());
    if (j.contains("judgements")) c.judgements = resolve(base, j.at("judgements").get<std::string>());
    if (j.contains("manifest")) c.manifest = resolve(base, j.at("manifest").get<std::string>());
    if (j.contains("traces"))
      for (const auto& t : j.at("traces")) c.traces.push_back(resolve(base, t.get<std::string>()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, path.string() + ": " + e.what());
  }
}

void check_template_pin(const RunConfig& config) {
  if (!config.template_version.empty() && config.template_version != prompt::kTemplateVersion)
    throw Error(ErrorCode::invalid_config, "config pins templates '" + config.template_version + "' but this build renders '" +
                                               std::string(prompt::kTemplateVersion) + "'");
}

}  // namespace dki::cli
