#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace inertia_hd {

/// Invalid arguments: dimension mismatches, out-of-range parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values, failed factorizations, integrator step underflow.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::optional<double> where = std::nullopt)
      : std::runtime_error(what), where_(where) {}

  /// Time or iteration at which the failure happened, when known.
  std::optional<double> where() const { return where_; }

 private:
  std::optional<double> where_;
};

/// The objective lacks an oracle the operation needs (prox, Hessian-vector product).
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace inertia_hd
