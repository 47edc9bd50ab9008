#pragma once

#include <stdexcept>
#include <string>

namespace kta {

// Violated precondition on a public operation (shape, range, finiteness).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or unreadable input data (CSV/IDX files, checkpoints).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration rejected by schema validation. The message may span several
// lines, one per offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define KTA_REQUIRE(cond, msg)                                      \
  do {                                                              \
    if (!(cond)) throw ::kta::ContractViolation(std::string(msg)); \
  } while (0)

}  // namespace kta
