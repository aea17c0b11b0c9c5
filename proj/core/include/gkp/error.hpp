#pragma once

#include <stdexcept>
#include <string>

namespace gkp {

// Every failure raised by the library derives from Error, so callers that
// record failed trials can catch a single type and keep the tag.
class Error : public std::runtime_error {
 public:
  Error(std::string tag, const std::string& what)
      : std::runtime_error(what), tag_(std::move(tag)) {}

  const std::string& tag() const noexcept { return tag_; }

 private:
  std::string tag_;
};

// Requested order or size exceeds what a table was built for.
class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& what) : Error("capability", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

// A state does not fit on its grid (tail mass leaks past the guard band).
class GridOverflowError : public Error {
 public:
  explicit GridOverflowError(const std::string& what) : Error("grid_overflow", what) {}
};

class DegenerateStateError : public Error {
 public:
  explicit DegenerateStateError(const std::string& what) : Error("degenerate_state", what) {}
};

class DegenerateConditioningError : public Error {
 public:
  explicit DegenerateConditioningError(const std::string& what)
      : Error("degenerate_conditioning", what) {}
};

// Comb overlap vanishes; effective squeezing is undefined.
class MetricUndefinedError : public Error {
 public:
  explicit MetricUndefinedError(const std::string& what) : Error("metric_undefined", what) {}
};

}  // namespace gkp
