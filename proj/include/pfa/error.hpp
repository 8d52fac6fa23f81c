#pragma once

#include <stdexcept>
#include <string>

namespace pfa {

// Numeric values double as CLI exit codes for the first three kinds.
enum class ErrorKind {
  config = 2,
  data = 3,
  numeric = 4,
  domain = 5,
  degenerate_observation = 6,
  unsupported = 7,
  io = 8,
  invalid_argument = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace pfa
