#pragma once

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>

#include "dki/client/chat.hpp"

namespace dki::client {

// Content-addressed response store:
//   <root>/objects/<key[0:2]>/<key>.json   one response per file
//   <root>/index.jsonl                      manifest, one line per stored key
// Readers share a lock; writers are serialized. Files are written to a
// temporary name and renamed into place.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root);

  std::optional<ChatResponse> get(const std::string& key) const;
  void put(const std::string& key, const ChatRequest& request, const ChatResponse& response);
  bool contains(const std::string& key) const;

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path object_path(const std::string& key) const;

 private:
  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
};

}  // namespace dki::client
