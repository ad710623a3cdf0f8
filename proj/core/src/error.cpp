#include "dki/error.hpp"

namespace dki {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::pool_exhausted: return "pool_exhausted";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::duplicate_cue: return "duplicate_cue";
    case ErrorCode::empty_corpus: return "empty_corpus";
    case ErrorCode::missing_markers: return "missing_markers";
    case ErrorCode::malformed_line: return "malformed_line";
    case ErrorCode::unsupported_variant: return "unsupported_variant";
    case ErrorCode::network_exhausted: return "network_exhausted";
    case ErrorCode::auth: return "auth";
    case ErrorCode::provider: return "provider";
    case ErrorCode::config_mismatch: return "config_mismatch";
    case ErrorCode::mixed_t: return "mixed_t";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::empty_span: return "empty_span";
    case ErrorCode::zero_vector: return "zero_vector";
    case ErrorCode::missing_logit: return "missing_logit";
    case ErrorCode::pairing_mismatch: return "pairing_mismatch";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::schema: return "schema";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace dki
