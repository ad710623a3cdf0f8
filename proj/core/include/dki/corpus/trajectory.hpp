#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dki {

enum class Source { synthetic, real_world, narrative };

std::string_view to_string(Source source) noexcept;
std::optional<Source> parse_source(std::string_view text) noexcept;

// One cue and its ordered value history. values.front() is the earliest
// state, values.back() the latest.
struct DkiTrajectory {
  std::string id;
  std::string cue;
  std::vector<std::string> values;
  Source source = Source::synthetic;
  // Rewritten long-text document, only for Source::narrative.
  std::optional<std::string> document;

  std::size_t length() const noexcept { return values.size(); }
  const std::string& earliest() const { return values.front(); }
  const std::string& latest() const { return values.back(); }
  // T == 1: earliest and latest coincide.
  bool degenerate() const noexcept { return values.size() == 1; }

  bool operator==(const DkiTrajectory&) const = default;
};

struct GenerationConfig {
  std::size_t updates = 32;  // T
  std::size_t corpus_size = 200;
  std::uint64_t seed = 0;
  std::vector<std::string> word_pool;  // empty -> bundled list
  std::size_t word_length = 8;
};

struct CorpusStats {
  std::size_t count = 0;
  double mean_length = 0.0;
  std::size_t min_length = 0;
  std::size_t max_length = 0;
};

}  // namespace dki
