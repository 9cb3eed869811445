#pragma once

#include <stdexcept>
#include <string>

namespace dews {

enum class ErrorCode {
  InvalidArgument = 1,
  OutOfRange,
  ShapeMismatch,
  Io,
  Format,
  Capacity,
  DegenerateBand,
  Config,
  Infeasible,
};

// Single exception type for the library; the code survives the trip through
// the C API as a dews_status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace dews
