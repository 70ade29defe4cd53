#pragma once

#include <stdexcept>
#include <string>

namespace lgt {

inline constexpr const char* kVersion = "0.3.1";

/// A caller broke a documented precondition (wrong group, negative kappa, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad user input: geometry, plan files, guard limits. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

inline void require_config(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace lgt
