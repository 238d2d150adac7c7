#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conekrf {

/// Argument outside the domain of a closed-form quantity (r >= 1, gamma <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A metric density dropped to or below the positivity floor.
class PositivityError : public std::runtime_error {
 public:
  PositivityError(const std::string& what, std::vector<std::size_t> nodes)
      : std::runtime_error(what), nodes_(std::move(nodes)) {}

  const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<std::size_t> nodes_;
};

/// Newton or line-search failure.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad value, unknown key or a violated invariant.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace conekrf
