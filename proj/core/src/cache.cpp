#include "dki/client/cache.hpp"

#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "dki/error.hpp"

namespace dki::client {

namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io, "SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

nlohmann::json response_to_json(const ChatResponse& r) {
  nlohmann::json j;
  j["raw_text"] = r.raw_text;
  j["latency_ms"] = r.latency_ms;
  j["retries"] = r.retries;
  j["provider_meta"] = r.provider_meta;
  if (r.usage) j["usage"] = {{"prompt_tokens", r.usage->prompt_tokens}, {"completion_tokens", r.usage->completion_tokens}};
  return j;
}

ChatResponse response_from_json(const nlohmann::json& j) {
  ChatResponse r;
  r.raw_text = j.at("raw_text").get<std::string>();
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.retries = j.value("retries", 0);
  if (j.contains("provider_meta")) r.provider_meta = j["provider_meta"].get<std::map<std::string, std::string>>();
  if (j.contains("usage")) {
    r.usage = TokenUsage{j["usage"].value("prompt_tokens", 0), j["usage"].value("completion_tokens", 0)};
  }
  return r;
}

}  // namespace

std::string cache_key(const ChatRequest& request) {
  std::string material = "dki-cache/1";
  material += '\0';
  material += request.model_id;
  material += '\0';
  material += request.prompt.text;
  material += '\0';
  material += fmt::format("{:.17g}", request.temperature);
  material += '\0';
  material += std::to_string(request.max_output_tokens);
  return sha256_hex(material);
}

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / "objects", ec);
  if (ec) throw Error(ErrorCode::io, "cannot create cache directory " + root_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::object_path(const std::string& key) const {
  return root_ / "objects" / key.substr(0, 2) / (key + ".json");
}

bool ResponseCache::contains(const std::string& key) const {
  std::shared_lock lock(mutex_);
  return std::filesystem::exists(object_path(key));
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  std::ifstream in(object_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("response")) return std::nullopt;
  auto r = response_from_json(j["response"]);
  r.cache_hit = true;
  return r;
}

void ResponseCache::put(const std::string& key, const ChatRequest& request, const ChatResponse& response) {
  nlohmann::json j;
  j["key"] = key;
  j["model_id"] = request.model_id;
  j["temperature"] = request.temperature;
  j["max_output_tokens"] = request.max_output_tokens;
  j["trajectory_id"] = request.prompt.trajectory_id;
  j["variant"] = prompt::variant_name(request.prompt.variant);
  j["response"] = response_to_json(response);

  const auto path = object_path(key);
  std::unique_lock lock(mutex_);
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += fmt::format(".tmp{}", std::random_device{}());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write cache object " + tmp.string());
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);

  nlohmann::json entry = {{"key", key},
                          {"model_id", request.model_id},
                          {"trajectory_id", request.prompt.trajectory_id},
                          {"variant", prompt::variant_name(request.prompt.variant)}};
  std::ofstream index(root_ / "index.jsonl", std::ios::app | std::ios::binary);
  index << entry.dump() << '\n';
}

}  // namespace dki::client
