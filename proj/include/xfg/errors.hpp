#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace xfg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or box lies outside the region an object is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Bad sizes, empty inputs, inconsistent partitions.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// C(x) is rank deficient at the requested tolerance.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, std::vector<double> point)
      : Error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

/// Grid too coarse for the oscillation it has to resolve.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Energy is not convex along a search line (or the assembled system is indefinite).
class ConvexityError : public Error {
 public:
  using Error::Error;
};

/// Malformed config, expression or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace xfg
