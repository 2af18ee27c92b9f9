#pragma once

#include <stdexcept>
#include <string>

namespace rrtlab {

/// Thrown when a caller breaks an operation's precondition (dimension
/// mismatch, out-of-range parameter, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed scenario/script/trace text. `where` names the line or field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, std::string detail)
      : std::runtime_error(where + ": " + detail),
        where_(std::move(where)),
        detail_(std::move(detail)) {}
  const std::string& where() const noexcept { return where_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string where_;
  std::string detail_;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure during a planner run (e.g. scripted sampler exhausted).
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rrtlab
