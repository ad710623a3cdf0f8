#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "dki/error.hpp"
#include "dki/prompting/prompt.hpp"

namespace dki::client {

struct ChatRequest {
  std::string model_id;
  prompt::ProbePrompt prompt;
  double temperature = 0.0;
  int max_output_tokens = 256;
  std::optional<std::uint64_t> seed_hint;
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string raw_text;  // empty on refusals
  std::int64_t latency_ms = 0;
  std::optional<TokenUsage> usage;
  std::map<std::string, std::string> provider_meta;
  bool cache_hit = false;
  int retries = 0;
};

// Content address of a request: SHA-256 over model id, full prompt text,
// temperature and max_output_tokens. Hex encoded.
std::string cache_key(const ChatRequest& request);

struct RetryPolicy {
  int max_retries = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{30'000};
};

struct BatchLimits {
  std::size_t max_in_flight = 4;
  double rate_per_min = 600.0;
};

enum class EndpointKind { http, mock };

struct EndpointConfig {
  EndpointKind kind = EndpointKind::mock;
  std::string model_id = "mock/perfect";
  // http only
  std::string base_url;            // e.g. https://api.example.com/v1
  std::string path = "/chat/completions";
  std::string api_key_env;         // name of the env var holding the key
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
  BatchLimits limits;
  // mock only: policy text understood by parse_mock_policy
  std::string mock_policy = "perfect";
  std::uint64_t mock_seed = 0;
};

// JSON config file; see docs/endpoint.md.
EndpointConfig load_endpoint_config(const std::filesystem::path& path);
EndpointConfig parse_endpoint_config(std::string_view json_text);
EndpointConfig mock_endpoint(std::string_view policy, std::uint64_t seed = 0);

// Failure of a single request. key() identifies it for resumption.
class ClientError : public Error {
 public:
  ClientError(ErrorCode code, const std::string& message, std::string key)
      : Error(code, message + " [request " + key + "]"), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace dki::client
