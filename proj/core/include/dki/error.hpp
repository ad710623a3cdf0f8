#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dki {

enum class ErrorCode {
  invalid_config,
  pool_exhausted,
  parse_error,
  duplicate_cue,
  empty_corpus,
  missing_markers,
  malformed_line,
  unsupported_variant,
  network_exhausted,
  auth,
  provider,
  config_mismatch,
  mixed_t,
  empty_input,
  empty_span,
  zero_vector,
  missing_logit,
  pairing_mismatch,
  shape_mismatch,
  schema,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure in the library surfaces as this type; `code()` is stable and
// the CLI maps it onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dki
