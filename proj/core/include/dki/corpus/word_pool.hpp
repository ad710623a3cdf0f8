#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dki {

// Lowercase 8-letter English words shipped with the library, sorted.
std::span<const std::string> bundled_words();

// Keeps lowercase ASCII words of exactly `word_length` letters, sorted and
// de-duplicated. Pool order is part of the generator contract.
std::vector<std::string> filter_pool(std::span<const std::string> words, std::size_t word_length);

// One word per line; blank lines ignored.
std::vector<std::string> read_word_list(const std::filesystem::path& path);

}  // namespace dki
