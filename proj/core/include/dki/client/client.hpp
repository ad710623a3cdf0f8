#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "dki/client/cache.hpp"
#include "dki/client/chat.hpp"
#include "dki/client/mock.hpp"
#include "dki/corpus/trajectory.hpp"

namespace dki::client {

struct BatchItem {
  std::optional<ChatResponse> response;
  std::optional<ErrorCode> error;
  std::string error_message;
  std::string key;

  bool ok() const noexcept { return response.has_value(); }
};

// Chat-completions client over HTTP, or a mock responder behind the same
// surface. Safe to share between threads.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig endpoint, std::shared_ptr<ResponseCache> cache = nullptr);
  ~ChatClient();
  ChatClient(const ChatClient&) = delete;
  ChatClient& operator=(const ChatClient&) = delete;

  // Retries transport failures and HTTP 408/429/5xx with exponential backoff.
  // Throws ClientError (network_exhausted, auth, provider).
  ChatResponse complete(const ChatRequest& request);

  // Responses in request order; failures are reported per item. At most
  // limits.max_in_flight requests are outstanding at any time.
  std::vector<BatchItem> complete_batch(std::span<const ChatRequest> requests, const BatchLimits& limits);
  std::vector<BatchItem> complete_batch(std::span<const ChatRequest> requests) {
    return complete_batch(requests, endpoint_.limits);
  }

  // Mock endpoints answer from the prompt's record block; trajectories
  // registered here take precedence (needed for narrative prompts).
  void register_trajectories(std::span<const DkiTrajectory> corpus);

  ChatRequest make_request(prompt::ProbePrompt prompt, std::optional<std::uint64_t> seed_hint = {}) const;

  const EndpointConfig& endpoint() const noexcept { return endpoint_; }
  std::size_t network_calls() const noexcept { return network_calls_.load(); }

 private:
  ChatResponse call_endpoint(const ChatRequest& request, const std::string& key);
  ChatResponse call_http(const ChatRequest& request, const std::string& key);
  ChatResponse call_mock(const ChatRequest& request);

  EndpointConfig endpoint_;
  std::shared_ptr<ResponseCache> cache_;
  std::optional<MockPolicy> mock_;
  std::atomic<std::size_t> network_calls_{0};
  std::mutex registry_mutex_;
  std::unordered_map<std::string, DkiTrajectory> registry_;
};

}  // namespace dki::client
