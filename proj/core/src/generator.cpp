#include "dki/corpus/generator.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "dki/corpus/rng.hpp"
#include "dki/corpus/word_pool.hpp"
#include "dki/error.hpp"

namespace dki {
namespace {

constexpr std::uint64_t kCueTag = 1;
constexpr std::uint64_t kValueTag = 2;

// First `k` positions of a Fisher-Yates shuffle of [0, n), with swaps kept
// sparse so cost is O(k) regardless of n.
std::vector<std::size_t> shuffle_prefix(CounterStream& stream, std::size_t n, std::size_t k) {
  std::unordered_map<std::size_t, std::size_t> moved;
  auto at = [&](std::size_t i) {
    auto it = moved.find(i);
    return it == moved.end() ? i : it->second;
  };
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(stream.below(n - i));
    const std::size_t vi = at(i);
    const std::size_t vj = at(j);
    moved[j] = vi;
    out.push_back(vj);
  }
  return out;
}

DkiTrajectory sample_from_pool(const GenerationConfig& config, const std::vector<std::string>& pool,
                               std::size_t index) {
  const std::uint64_t root = mix64(config.seed);
  const std::uint64_t updates = config.updates;

  CounterStream cue_stream(derive_key(derive_key(root, kCueTag), updates));
  const std::size_t cue_index = shuffle_prefix(cue_stream, pool.size(), index + 1).back();

  CounterStream value_stream(derive_key(derive_key(derive_key(root, kValueTag), updates), index));
  const auto picks = shuffle_prefix(value_stream, pool.size() - 1, config.updates);

  DkiTrajectory t;
  t.id = synthetic_id(config, index);
  t.cue = pool[cue_index];
  t.source = Source::synthetic;
  t.values.reserve(picks.size());
  for (std::size_t p : picks) t.values.push_back(pool[p >= cue_index ? p + 1 : p]);
  return t;
}

}  // namespace

std::string synthetic_id(const GenerationConfig& config, std::size_t index) {
  return fmt::format("syn-T{}-s{}-{:04d}", config.updates, config.seed, index);
}

std::vector<std::string> validated_pool(const GenerationConfig& config) {
  if (config.updates == 0) throw Error(ErrorCode::invalid_config, "update count T must be positive");
  if (config.word_length == 0) throw Error(ErrorCode::invalid_config, "word_length must be positive");
  auto pool = config.word_pool.empty() ? filter_pool(bundled_words(), config.word_length)
                                       : filter_pool(config.word_pool, config.word_length);
  if (pool.empty()) {
    throw Error(ErrorCode::invalid_config,
                fmt::format("word pool is empty after filtering to length {}", config.word_length));
  }
  if (pool.size() < config.updates + 1) {
    throw Error(ErrorCode::pool_exhausted,
                fmt::format("pool of {} words cannot supply a cue plus {} distinct values", pool.size(),
                            config.updates));
  }
  if (pool.size() < config.corpus_size) {
    throw Error(ErrorCode::pool_exhausted,
                fmt::format("pool of {} words cannot supply {} distinct cues", pool.size(), config.corpus_size));
  }
  return pool;
}

DkiTrajectory generate_synthetic_dki(const GenerationConfig& config, std::size_t index) {
  auto pool = validated_pool(config);
  if (index >= config.corpus_size) {
    throw Error(ErrorCode::invalid_config,
                fmt::format("index {} out of range for corpus of {}", index, config.corpus_size));
  }
  return sample_from_pool(config, pool, index);
}

std::vector<DkiTrajectory> generate_corpus(const GenerationConfig& config) {
  std::vector<DkiTrajectory> corpus;
  if (config.corpus_size == 0) return corpus;
  const auto pool = validated_pool(config);
  corpus.reserve(config.corpus_size);
  for (std::size_t i = 0; i < config.corpus_size; ++i) corpus.push_back(sample_from_pool(config, pool, i));
  return corpus;
}

CorpusStats corpus_stats(std::span<const DkiTrajectory> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::empty_corpus, "corpus_stats needs at least one trajectory");
  CorpusStats stats;
  stats.count = corpus.size();
  stats.min_length = corpus.front().length();
  stats.max_length = corpus.front().length();
  std::size_t total = 0;
  for (const auto& t : corpus) {
    total += t.length();
    stats.min_length = std::min(stats.min_length, t.length());
    stats.max_length = std::max(stats.max_length, t.length());
  }
  stats.mean_length = static_cast<double>(total) / static_cast<double>(corpus.size());
  return stats;
}

}  // namespace dki
