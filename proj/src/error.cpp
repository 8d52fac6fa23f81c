#include "pfa/error.hpp"

namespace pfa {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config error";
    case ErrorKind::data: return "data error";
    case ErrorKind::numeric: return "numeric failure";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::degenerate_observation: return "degenerate observation";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::invalid_argument: return "invalid argument";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace pfa
