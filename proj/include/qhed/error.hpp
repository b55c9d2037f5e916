#pragma once

#include <stdexcept>
#include <string>

namespace qhed {

enum class ErrorKind {
  Domain,
  Shape,
  Normalization,
  Circuit,
  Resource,
  Planning,
  Aggregation,
  Parse,
  Numerical,
  Precondition,
};

const char* to_string(ErrorKind kind);

// Base class for every error raised by the library. The kind drives the CLI
// exit code (parse/config -> 2, resource -> 3, numerical -> 4).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define QHED_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& message) : Error(Kind, message) {} \
  };

QHED_DEFINE_ERROR(DomainError, ErrorKind::Domain)
QHED_DEFINE_ERROR(ShapeError, ErrorKind::Shape)
QHED_DEFINE_ERROR(NormalizationError, ErrorKind::Normalization)
QHED_DEFINE_ERROR(CircuitError, ErrorKind::Circuit)
QHED_DEFINE_ERROR(ResourceError, ErrorKind::Resource)
QHED_DEFINE_ERROR(PlanningError, ErrorKind::Planning)
QHED_DEFINE_ERROR(AggregationError, ErrorKind::Aggregation)
QHED_DEFINE_ERROR(ParseError, ErrorKind::Parse)
QHED_DEFINE_ERROR(NumericalError, ErrorKind::Numerical)
QHED_DEFINE_ERROR(PreconditionError, ErrorKind::Precondition)

#undef QHED_DEFINE_ERROR

}  // namespace qhed
