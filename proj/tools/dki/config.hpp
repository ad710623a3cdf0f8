#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dki/client/chat.hpp"
#include "dki/eval/judge.hpp"

namespace dki::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kIo = 3,
  kEndpoint = 4,
  kValidation = 5,
};

int exit_code_for(ErrorCode code) noexcept;

// Everything a subcommand reads. Defaults follow the standard sweep: 200
// synthetic DKIs, T in {32..512}, seeds 0..4, temperature 0.
struct RunConfig {
  std::vector<std::size_t> lengths{32, 64, 128, 256, 512};
  std::size_t count = 200;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::optional<std::filesystem::path> word_list;
  std::size_t word_length = 8;
  std::optional<std::filesystem::path> corpus;

  std::vector<std::string> variants{"baseline"};
  client::EndpointConfig endpoint = client::mock_endpoint("perfect");
  eval::MatchMode match = eval::MatchMode::strict;
  bool include_flagged_narratives = false;
  std::optional<std::size_t> request_budget;
  std::optional<std::filesystem::path> cache_dir;  // default: <out>/cache
  std::string template_version;                    // empty: accept the built-in version

  std::filesystem::path out = "dki-out";
  std::optional<std::filesystem::path> judgements;
  std::optional<std::filesystem::path> manifest;
  std::vector<std::filesystem::path> traces;
};

// Keys mirror the RunConfig fields; "endpoint" is either an inline endpoint
// object or a path to an endpoint config file. Unknown keys are rejected.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Throws invalid_config when the pinned template version differs from the
// built-in one.
void check_template_pin(const RunConfig& config);

}  // namespace dki::cli
