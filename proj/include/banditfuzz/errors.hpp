#pragma once

#include <stdexcept>
#include <string>

namespace bfz {

// Invalid user-facing configuration: bad flag values, missing inputs,
// malformed dictionaries or stats files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An initial seed crashed the target during campaign setup.
class InitialSeedCrash : public std::runtime_error {
 public:
  explicit InitialSeedCrash(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bfz
