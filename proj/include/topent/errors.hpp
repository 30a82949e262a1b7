#pragma once

#include <stdexcept>
#include <string>

namespace topent {

// Exit codes shared with the CLI: 0 success, 1 failed check, 2 bad
// usage/config, 3 resource cap exceeded.
enum class ExitCode : int { ok = 0, check_failed = 1, config = 2, resource = 3 };

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

class resource_error : public std::runtime_error {
 public:
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// A caller-facing contract was violated (e.g. a non-monotone evaluator handed
// to the critical-exponent search, or a decomposition whose union misses the
// target set).
class contract_error : public std::logic_error {
 public:
  explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace topent
