#include "qhed/error.hpp"

namespace qhed {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Normalization: return "normalization error";
    case ErrorKind::Circuit: return "circuit error";
    case ErrorKind::Resource: return "resource error";
    case ErrorKind::Planning: return "planning error";
    case ErrorKind::Aggregation: return "aggregation error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Numerical: return "numerical error";
    case ErrorKind::Precondition: return "precondition error";
  }
  return "error";
}

}  // namespace qhed
