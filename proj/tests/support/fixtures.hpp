#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dki/corpus/trajectory.hpp"
#include "dki/eval/judge.hpp"

#include <gtest/gtest.h>

namespace dki::testing {

// The 13-value "President of Italy" record list from the prompt example.
DkiTrajectory italy();

// Judgements for `n` items of which the first `earliest`/`latest` are correct.
std::vector<eval::ProbeJudgement> endpoint_judgements(std::size_t n, std::size_t earliest, std::size_t latest,
                                                      const std::string& variant = "baseline", std::uint64_t seed = 0);

// LLaMA3.1-8B real-world row without intervention: 158/164 earliest, 124/164 latest.
inline constexpr std::size_t kReferenceItems = 164;
inline constexpr std::size_t kReferenceEarliest = 158;
inline constexpr std::size_t kReferenceLatest = 124;

// Five seeds of 300 items whose latest accuracy has mean 18.67% and
// population std 0.47%.
inline constexpr std::size_t kSeedItems = 300;
inline const std::vector<std::size_t> kSeedLatestCounts{54, 56, 58, 55, 57};

// 164 trajectories, lengths summing to 1438 (mean 8.77), min 2, max 70.
std::vector<DkiTrajectory> real_world_length_fixture();

// Path of a file under tests/data.
std::string data_path(const std::string& name);

}  // namespace dki::testing

namespace dki::testing {

// Compares `text` against tests/snapshots/<name>. With DKI_UPDATE_SNAPSHOTS
// set the file is rewritten and the check passes; a missing file fails.
::testing::AssertionResult matches_snapshot(const std::string& name, const std::string& text);

}  // namespace dki::testing
