#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace leki {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Invalid configuration: bad dimensions, unknown names, out-of-range settings.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// API misuse detectable at call time, e.g. asymmetric input to a symmetric-only routine.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Input outside a routine's mathematical domain.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite intermediates or a failed numeric kernel. Run loops convert this
// to a failed exit instead of propagating.
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace leki
