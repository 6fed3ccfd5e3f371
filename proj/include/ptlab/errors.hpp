#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ptlab {

/// Raised when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation would exceed its configured work budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double estimate, double budget)
      : std::runtime_error(what + " (estimate " + std::to_string(estimate) + " units, budget " +
                           std::to_string(budget) + ")"),
        estimate_(estimate),
        budget_(budget) {}

  double estimate() const { return estimate_; }
  double budget() const { return budget_; }

 private:
  double estimate_;
  double budget_;
};

/// An internal consistency check failed. Always a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#define PTLAB_REQUIRE(cond, msg)                      \
  do {                                                \
    if (!(cond)) throw ::ptlab::PreconditionError(msg); \
  } while (0)

#define PTLAB_ASSERT(cond, msg)                   \
  do {                                            \
    if (!(cond)) throw ::ptlab::InternalError(msg); \
  } while (0)

}  // namespace ptlab
