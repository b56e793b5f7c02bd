#pragma once

#include <stdexcept>
#include <string>

namespace fedloc {

/// Base exception for contract violations reported by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a trajectory cannot constrain a rigid alignment
/// (collinear or coincident positions).
class DegenerateTrajectory : public Error {
 public:
  DegenerateTrajectory() : Error("degenerate trajectory") {}
};

/// Raised by the wire decoder; `key()` names the offending field.
class DecodeError : public Error {
 public:
  DecodeError(std::string key, const std::string& what)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace fedloc
