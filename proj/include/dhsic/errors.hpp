#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dhsic {

// Raised when every pairwise distance in a block is zero, so no bandwidth
// scale exists.
struct AllPointsIdentical : std::runtime_error {
  explicit AllPointsIdentical(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

// A combinatorial guard tripped (enumeration count or naive-sum size).
// `count` carries the offending size when it fits in 64 bits (saturated
// at uint64 max otherwise).
struct GuardExceeded : std::runtime_error {
  GuardExceeded(const std::string& msg, std::uint64_t count_)
      : std::runtime_error(msg), count(count_) {}
  std::uint64_t count;
};

struct WrongArity : std::runtime_error {
  explicit WrongArity(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SearchExhausted : std::runtime_error {
  explicit SearchExhausted(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dhsic
