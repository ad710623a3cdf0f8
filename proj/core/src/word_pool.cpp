#include "dki/corpus/word_pool.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dki/error.hpp"

namespace dki {
namespace detail {
extern const char* const kBundledWords;
}

namespace {

bool lower_ascii_word(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

std::vector<std::string> split_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

std::span<const std::string> bundled_words() {
  static const std::vector<std::string> words = [] {
    std::istringstream in(detail::kBundledWords);
    auto lines = split_lines(in);
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    return lines;
  }();
  return words;
}

std::vector<std::string> filter_pool(std::span<const std::string> words, std::size_t word_length) {
  std::vector<std::string> pool;
  for (const auto& w : words) {
    if (w.size() == word_length && lower_ascii_word(w)) pool.push_back(w);
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  return pool;
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open word list " + path.string());
  return split_lines(in);
}

}  // namespace dki
