#include "dki/client/mock.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "dki/corpus/rng.hpp"
#include "dki/prompting/answer.hpp"

namespace dki::client {

namespace {

std::optional<double> parse_number(std::string_view text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

// "name(arg)" or "name:arg" -> (name, arg)
std::pair<std::string_view, std::string_view> split_call(std::string_view text) {
  if (auto open = text.find('('); open != std::string_view::npos && text.back() == ')') {
    return {text.substr(0, open), text.substr(open + 1, text.size() - open - 2)};
  }
  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    return {text.substr(0, colon), text.substr(colon + 1)};
  }
  return {text, {}};
}

// A lowercase token absent from the trajectory.
std::string out_of_field_word(CounterStream& stream, const DkiTrajectory& t) {
  for (;;) {
    std::string w = "oof";
    for (int i = 0; i < 8; ++i) w += static_cast<char>('a' + stream.below(26));
    if (w != t.cue && std::find(t.values.begin(), t.values.end(), w) == t.values.end()) return w;
  }
}

}  // namespace

std::optional<MockPolicy> parse_mock_policy(std::string_view text) {
  auto [name, arg] = split_call(text);
  MockPolicy p;
  if (name == "perfect" || name == "primacy_biased" || name == "unknown_always") {
    if (!arg.empty()) return std::nullopt;
    p.kind = name == "perfect" ? MockKind::perfect
             : name == "primacy_biased" ? MockKind::primacy_biased
                                        : MockKind::unknown_always;
    return p;
  }
  if (name == "recency_window") {
    auto w = parse_number(arg);
    if (!w || *w < 1 || *w != static_cast<double>(static_cast<unsigned>(*w))) return std::nullopt;
    p.kind = MockKind::recency_window;
    p.window = static_cast<unsigned>(*w);
    return p;
  }
  if (name == "oof_prone") {
    auto r = parse_number(arg);
    if (!r || *r < 0.0 || *r > 1.0) return std::nullopt;
    p.kind = MockKind::oof_prone;
    p.oof_rate = *r;
    return p;
  }
  return std::nullopt;
}

std::string mock_policy_name(const MockPolicy& policy) {
  switch (policy.kind) {
    case MockKind::perfect: return "perfect";
    case MockKind::primacy_biased: return "primacy_biased";
    case MockKind::unknown_always: return "unknown_always";
    case MockKind::recency_window: return fmt::format("recency_window({})", policy.window);
    case MockKind::oof_prone: return fmt::format("oof_prone({})", policy.oof_rate);
  }
  return "perfect";
}

ChatResponse mock_complete(const MockPolicy& policy, const DkiTrajectory& trajectory) {
  CounterStream stream(derive_key(mix64(policy.seed), fnv1a64(trajectory.id)));
  const auto& values = trajectory.values;
  std::string earliest = values.front();
  std::string latest = values.back();

  switch (policy.kind) {
    case MockKind::perfect: break;
    case MockKind::primacy_biased: latest = values.front(); break;
    case MockKind::unknown_always:
      earliest = std::string(prompt::kUnknown);
      latest = std::string(prompt::kUnknown);
      break;
    case MockKind::recency_window: {
      const std::size_t w = std::min<std::size_t>(std::max(1u, policy.window), values.size());
      latest = values[values.size() - w + stream.below(w)];
      break;
    }
    case MockKind::oof_prone:
      if (stream.unit() < policy.oof_rate) latest = out_of_field_word(stream, trajectory);
      break;
  }

  ChatResponse r;
  r.raw_text = prompt::format_answer(trajectory.cue, earliest, latest);
  r.provider_meta["provider"] = "mock";
  r.provider_meta["policy"] = mock_policy_name(policy);
  return r;
}

}  // namespace dki::client
