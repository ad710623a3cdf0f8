#include "dki/client/client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "dki/log.hpp"

namespace dki::client {

using Clock = std::chrono::steady_clock;

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::invalid_config, "base_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl p;
  p.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) p.prefix = url.substr(path_start);
  while (!p.prefix.empty() && p.prefix.back() == '/') p.prefix.pop_back();
  return p;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::chrono::milliseconds backoff(const RetryPolicy& policy, int attempt) {
  auto delay = policy.base_delay * (std::int64_t{1} << std::min(attempt, 20));
  return std::min(delay, policy.max_delay);
}

}  // namespace

EndpointConfig mock_endpoint(std::string_view policy, std::uint64_t seed) {
  auto parsed = parse_mock_policy(policy);
  if (!parsed) throw Error(ErrorCode::invalid_config, "unknown mock policy '" + std::string(policy) + "'");
  EndpointConfig e;
  e.kind = EndpointKind::mock;
  e.mock_policy = mock_policy_name(*parsed);
  e.mock_seed = seed;
  e.model_id = fmt::format("mock/{}/seed{}", e.mock_policy, seed);
  return e;
}

EndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open endpoint config " + path.string());
  return parse_endpoint_config(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
}

EndpointConfig parse_endpoint_config(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::invalid_config, "endpoint config is not a JSON object");
  try {
    if (j.contains("mock")) {
      auto e = mock_endpoint(j["mock"].get<std::string>(), j.value("mock_seed", std::uint64_t{0}));
      if (j.contains("limits")) {
        e.limits.max_in_flight = j["limits"].value("max_in_flight", e.limits.max_in_flight);
        e.limits.rate_per_min = j["limits"].value("rate_per_min", e.limits.rate_per_min);
      }
      return e;
    }
    EndpointConfig e;
    e.kind = EndpointKind::http;
    e.base_url = j.at("base_url").get<std::string>();
    e.model_id = j.at("model").get<std::string>();
    e.path = j.value("path", e.path);
    e.api_key_env = j.value("api_key_env", std::string{});
    e.timeout = std::chrono::seconds(j.value("timeout_s", 120));
    if (j.contains("retry")) {
      const auto& r = j["retry"];
      e.retry.max_retries = r.value("max_retries", e.retry.max_retries);
      e.retry.base_delay = std::chrono::milliseconds(r.value("base_delay_ms", 500));
      e.retry.max_delay = std::chrono::milliseconds(r.value("max_delay_ms", 30'000));
    }
    if (j.contains("limits")) {
      e.limits.max_in_flight = j["limits"].value("max_in_flight", e.limits.max_in_flight);
      e.limits.rate_per_min = j["limits"].value("rate_per_min", e.limits.rate_per_min);
    }
    parse_url(e.base_url);
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::invalid_config, std::string("endpoint config: ") + ex.what());
  }
}

ChatClient::ChatClient(EndpointConfig endpoint, std::shared_ptr<ResponseCache> cache)
    : endpoint_(std::move(endpoint)), cache_(std::move(cache)) {
  if (endpoint_.kind == EndpointKind::mock) {
    mock_ = parse_mock_policy(endpoint_.mock_policy);
    if (!mock_) throw Error(ErrorCode::invalid_config, "unknown mock policy '" + endpoint_.mock_policy + "'");
    mock_->seed = endpoint_.mock_seed;
  } else {
    parse_url(endpoint_.base_url);
  }
}

ChatClient::~ChatClient() = default;

void ChatClient::register_trajectories(std::span<const DkiTrajectory> corpus) {
  std::lock_guard lock(registry_mutex_);
  for (const auto& t : corpus) registry_.insert_or_assign(t.id, t);
}

ChatRequest ChatClient::make_request(prompt::ProbePrompt prompt, std::optional<std::uint64_t> seed_hint) const {
  ChatRequest r;
  r.model_id = endpoint_.model_id;
  r.prompt = std::move(prompt);
  r.seed_hint = seed_hint;
  return r;
}

ChatResponse ChatClient::complete(const ChatRequest& request) {
  const auto key = cache_key(request);
  if (cache_) {
    if (auto hit = cache_->get(key)) return *hit;
  }
  auto response = call_endpoint(request, key);
  if (cache_) cache_->put(key, request, response);
  return response;
}

ChatResponse ChatClient::call_endpoint(const ChatRequest& request, const std::string& key) {
  network_calls_.fetch_add(1);
  if (mock_) return call_mock(request);
  return call_http(request, key);
}

ChatResponse ChatClient::call_mock(const ChatRequest& request) {
  {
    std::lock_guard lock(registry_mutex_);
    if (auto it = registry_.find(request.prompt.trajectory_id); it != registry_.end()) {
      return mock_complete(*mock_, it->second);
    }
  }
  const auto records = prompt::extract_records(request.prompt.text);
  if (records.empty()) throw Error(ErrorCode::missing_markers, "mock endpoint: prompt has no records");
  DkiTrajectory t;
  t.id = request.prompt.trajectory_id;
  t.cue = records.front().cue;
  for (const auto& r : records) t.values.push_back(r.value);
  return mock_complete(*mock_, t);
}

ChatResponse ChatClient::call_http(const ChatRequest& request, const std::string& key) {
  const auto url = parse_url(endpoint_.base_url);
  httplib::Client http(url.origin);
  http.set_connection_timeout(endpoint_.timeout);
  http.set_read_timeout(endpoint_.timeout);
  http.set_write_timeout(endpoint_.timeout);

  httplib::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    if (const char* secret = std::getenv(endpoint_.api_key_env.c_str()); secret && *secret) {
      headers.emplace("Authorization", std::string("Bearer ") + secret);
    }
  }

  nlohmann::json body = {
      {"model", request.model_id},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt.text}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };
  if (request.seed_hint) body["seed"] = *request.seed_hint;
  const auto payload = body.dump();
  const auto target = url.prefix + endpoint_.path;

  std::string last_failure;
  for (int attempt = 0;; ++attempt) {
    const auto started = Clock::now();
    auto res = http.Post(target, headers, payload, "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();

    if (res && res->status == 200) {
      auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw ClientError(ErrorCode::provider, "endpoint returned a non-JSON body", key);
      }
      if (j.contains("error")) {
        throw ClientError(ErrorCode::provider, "provider error: " + j["error"].dump(), key);
      }
      ChatResponse r;
      r.latency_ms = elapsed;
      r.retries = attempt;
      try {
        const auto& message = j.at("choices").at(0).at("message");
        if (message.contains("content") && message["content"].is_string()) {
          r.raw_text = message["content"].get<std::string>();
        }
        if (j.contains("usage") && j["usage"].is_object()) {
          r.usage = TokenUsage{j["usage"].value("prompt_tokens", 0), j["usage"].value("completion_tokens", 0)};
        }
        if (j.contains("id") && j["id"].is_string()) r.provider_meta["id"] = j["id"].get<std::string>();
        if (j.contains("model") && j["model"].is_string()) r.provider_meta["model"] = j["model"].get<std::string>();
        const auto& choice = j["choices"][0];
        if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
          r.provider_meta["finish_reason"] = choice["finish_reason"].get<std::string>();
        }
      } catch (const nlohmann::json::exception& ex) {
        throw ClientError(ErrorCode::provider, std::string("unexpected response shape: ") + ex.what(), key);
      }
      r.provider_meta["retries"] = std::to_string(attempt);
      if (attempt > 0) log::info("request {} succeeded after {} retries", key.substr(0, 12), attempt);
      return r;
    }

    if (res) {
      const int status = res->status;
      if (status == 401 || status == 403) {
        throw ClientError(ErrorCode::auth, fmt::format("HTTP {} from {}", status, url.origin), key);
      }
      if (!retryable_status(status)) {
        throw ClientError(ErrorCode::provider, fmt::format("HTTP {}: {}", status, res->body.substr(0, 200)), key);
      }
      last_failure = fmt::format("HTTP {}", status);
    } else {
      last_failure = httplib::to_string(res.error());
    }

    if (attempt >= endpoint_.retry.max_retries) {
      throw ClientError(ErrorCode::network_exhausted,
                        fmt::format("gave up after {} retries, last failure: {}", attempt, last_failure), key);
    }
    const auto delay = backoff(endpoint_.retry, attempt);
    log::warn("request {}: {} (retry {} in {} ms)", key.substr(0, 12), last_failure, attempt + 1, delay.count());
    std::this_thread::sleep_for(delay);
  }
}

std::vector<BatchItem> ChatClient::complete_batch(std::span<const ChatRequest> requests, const BatchLimits& limits) {
  if (limits.max_in_flight == 0 || !(limits.rate_per_min > 0.0)) {
    throw Error(ErrorCode::invalid_config, "batch limits must be positive");
  }
  std::vector<BatchItem> results(requests.size());
  if (requests.empty()) return results;

  std::atomic<std::size_t> next{0};
  std::mutex rate_mutex;
  auto next_slot = Clock::now();
  const auto spacing = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(60.0 / limits.rate_per_min));

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      const auto& request = requests[i];
      auto& item = results[i];
      item.key = cache_key(request);
      try {
        if (cache_) {
          if (auto hit = cache_->get(item.key)) {
            item.response = std::move(*hit);
            continue;
          }
        }
        if (endpoint_.kind == EndpointKind::http) {
          Clock::time_point slot;
          {
            std::lock_guard lock(rate_mutex);
            slot = std::max(next_slot, Clock::now());
            next_slot = slot + spacing;
          }
          std::this_thread::sleep_until(slot);
        }
        auto response = call_endpoint(request, item.key);
        if (cache_) cache_->put(item.key, request, response);
        item.response = std::move(response);
      } catch (const Error& e) {
        item.error = e.code();
        item.error_message = e.what();
      } catch (const std::exception& e) {
        item.error = ErrorCode::provider;
        item.error_message = e.what();
      }
    }
  };

  const std::size_t threads = std::min(limits.max_in_flight, requests.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

}  // namespace dki::client
