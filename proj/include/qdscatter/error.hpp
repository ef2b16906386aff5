#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qdscatter {

enum class ErrorCode {
  invalid_parameter,
  geometry,
  window_too_small,
  convergence,
  resource,
  insufficient_basis,
  contaminated_lead,
  undefined_post_selection,
  upstream_unitarity,
  numerical_consistency,
  config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::geometry: return "geometry";
    case ErrorCode::window_too_small: return "window-too-small";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::resource: return "resource";
    case ErrorCode::insufficient_basis: return "insufficient-basis";
    case ErrorCode::contaminated_lead: return "contaminated-lead";
    case ErrorCode::undefined_post_selection: return "undefined-post-selection";
    case ErrorCode::upstream_unitarity: return "upstream-unitarity";
    case ErrorCode::numerical_consistency: return "numerical-consistency";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace qdscatter
