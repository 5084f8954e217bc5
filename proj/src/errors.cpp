#include "fastmod/errors.hpp"

#include <sstream>
#include <utility>

namespace fastmod {

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kGammaSingularity:
      return "gamma-singularity";
    case ErrorKind::kInsideObstacle:
      return "inside-obstacle";
    case ErrorKind::kContact:
      return "contact";
    case ErrorKind::kStaleWrite:
      return "stale-write";
    case ErrorKind::kInvalidConfig:
      return "invalid-config";
    case ErrorKind::kSchema:
      return "schema";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

namespace {

std::string contact_message(const std::vector<std::size_t>& indices, double min_distance) {
  std::ostringstream os;
  os << indices.size() << " point(s) within the agent radius (min clearance " << min_distance
     << " m)";
  return os.str();
}

}  // namespace

ContactError::ContactError(std::vector<std::size_t> indices, double min_distance)
    : Error(ErrorKind::kContact, contact_message(indices, min_distance)),
      indices_(std::move(indices)),
      min_distance_(min_distance) {}

}  // namespace fastmod
