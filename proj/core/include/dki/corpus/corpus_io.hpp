#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dki/corpus/trajectory.hpp"

namespace dki {

// DKI corpus files are JSON Lines, UTF-8, one record per line:
//   {"id":"...","cue":"...","values":["...",...],"source":"real_world"}
// "source" defaults to real_world; narrative records also carry "document".
// Blank lines are ignored. Errors name the 1-based line.

std::vector<DkiTrajectory> read_corpus(std::istream& in, Source default_source = Source::real_world);
std::vector<DkiTrajectory> load_real_world(const std::filesystem::path& path);

std::string serialize_record(const DkiTrajectory& trajectory);
void write_corpus(std::ostream& out, std::span<const DkiTrajectory> corpus);
void write_corpus_file(const std::filesystem::path& path, std::span<const DkiTrajectory> corpus);

}  // namespace dki
