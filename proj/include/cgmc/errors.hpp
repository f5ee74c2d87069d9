#pragma once

#include <stdexcept>
#include <string>

namespace cgmc {

// Precondition or internal invariant broken by the caller. Indicates a bug,
// not a recoverable condition.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Invalid user-supplied configuration (bad sizes, q not dividing N, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Request exceeds a hard enumeration cap.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failure; message carries the offending path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// const char* overload so call sites in hot loops do not build strings.
inline void contract_check(bool ok, const char* msg) {
  if (!ok) throw ContractError(msg);
}

inline void contract_check(bool ok, const std::string& msg) {
  if (!ok) throw ContractError(msg);
}

}  // namespace cgmc
