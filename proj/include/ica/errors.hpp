#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ica {

// Argument outside a function's mathematical domain (negative utility,
// non-positive width, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Slope requested outside the range a valuation can realise.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Malformed or semantically invalid input. `path` names the offending field,
// e.g. "utilities[1]" or "agents[0].valuation.cap".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// A solver invariant failed at runtime. Carries the serialized event trace up
// to the failure so it can be dumped for debugging.
class InvariantViolation : public std::logic_error {
 public:
  InvariantViolation(const std::string& what, std::vector<std::string> trace)
      : std::logic_error(what), trace_(std::move(trace)) {}

  const std::vector<std::string>& trace() const noexcept { return trace_; }

 private:
  std::vector<std::string> trace_;
};

}  // namespace ica
