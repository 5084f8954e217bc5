#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fastmod {

enum class ErrorKind {
  kGammaSingularity,
  kInsideObstacle,
  kContact,
  kStaleWrite,
  kInvalidConfig,
  kSchema,
};

/// Stable identifier used in diagnostics and wire messages ("gamma-singularity", ...).
std::string_view error_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the agent disc touches or overlaps sampled surface points.
class ContactError : public Error {
 public:
  ContactError(std::vector<std::size_t> indices, double min_distance);

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  double min_distance() const noexcept { return min_distance_; }

 private:
  std::vector<std::size_t> indices_;
  double min_distance_;
};

}  // namespace fastmod
