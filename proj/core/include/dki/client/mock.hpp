#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dki/client/chat.hpp"
#include "dki/corpus/trajectory.hpp"

namespace dki::client {

// Behavioral doubles of the observed failure modes.
enum class MockKind { perfect, primacy_biased, recency_window, oof_prone, unknown_always };

struct MockPolicy {
  MockKind kind = MockKind::perfect;
  unsigned window = 1;   // recency_window, >= 1
  double oof_rate = 0.0; // oof_prone, in [0, 1]
  std::uint64_t seed = 0;
};

// "perfect", "primacy_biased", "recency_window(3)", "oof_prone(0.25)", "unknown_always".
std::optional<MockPolicy> parse_mock_policy(std::string_view text);
// Inverse of parse_mock_policy (seed not included).
std::string mock_policy_name(const MockPolicy& policy);

// Pure in (policy, trajectory). The answer is formatted like a model reply:
// {"cue":"...", "earliest":"...","latest":"..."}.
ChatResponse mock_complete(const MockPolicy& policy, const DkiTrajectory& trajectory);

}  // namespace dki::client
