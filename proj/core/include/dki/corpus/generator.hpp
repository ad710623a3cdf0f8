#pragma once

#include <span>
#include <vector>

#include "dki/corpus/trajectory.hpp"

namespace dki {

// Synthetic DKI sampling. Output is a pure function of (config, index):
//   cue    = element `index` of a pool permutation drawn from the cue stream
//   values = T draws without replacement from the pool minus the cue
// Stream keys: root = mix64(seed); cue stream = derive(derive(root, 1), T);
// value stream = derive(derive(derive(root, 2), T), index).
DkiTrajectory generate_synthetic_dki(const GenerationConfig& config, std::size_t index);

std::vector<DkiTrajectory> generate_corpus(const GenerationConfig& config);

// Throws invalid_config / pool_exhausted; returns the filtered pool.
std::vector<std::string> validated_pool(const GenerationConfig& config);

CorpusStats corpus_stats(std::span<const DkiTrajectory> corpus);

// Stable identifier for synthetic trajectory `index`.
std::string synthetic_id(const GenerationConfig& config, std::size_t index);

}  // namespace dki
