#pragma once

#include <stdexcept>
#include <string>

namespace snlab {

/// A covariance matrix that cannot describe a physical two-mode Gaussian state.
class MalformedCovariance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or incomplete configuration. `field()` names the offending entry when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The integration left its domain of validity (probability leaking through the grid edge, NaNs).
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested problem does not fit the resources a route is designed for.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace snlab
