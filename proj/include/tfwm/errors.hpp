#ifndef TFWM_ERRORS_HPP
#define TFWM_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace tfwm {

enum class ErrorClass {
  usage,
  format,
  unsupported_encoding,
  io,
  config,
  band,
  capacity,
  shape,
  length,
  index,
  domain,
  external_tool,
  alignment,
  tuning_failure,
};

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, std::string msg)
      : std::runtime_error(std::move(msg)), cls_(cls) {}

  ErrorClass cls() const noexcept { return cls_; }

private:
  ErrorClass cls_;
};

[[noreturn]] inline void fail(ErrorClass cls, const std::string& msg) {
  throw Error(cls, msg);
}

// CLI exit code partition: usage(2), format(3), capacity(4),
// external tool(5), tuning failure(6).
inline int exit_code_for(ErrorClass cls) noexcept {
  switch (cls) {
    case ErrorClass::format:
    case ErrorClass::unsupported_encoding:
    case ErrorClass::io:
      return 3;
    case ErrorClass::capacity:
      return 4;
    case ErrorClass::external_tool:
    case ErrorClass::alignment:
      return 5;
    case ErrorClass::tuning_failure:
      return 6;
    case ErrorClass::usage:
    case ErrorClass::config:
    case ErrorClass::band:
    case ErrorClass::shape:
    case ErrorClass::length:
    case ErrorClass::index:
    case ErrorClass::domain:
      return 2;
  }
  return 2;
}

const char* error_class_name(ErrorClass cls) noexcept;

}  // namespace tfwm

#endif
