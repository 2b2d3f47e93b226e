#include "ultrafield/error.hpp"

namespace ultrafield {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedSpec: return "MalformedSpec";
    case ErrorKind::BranchingOne: return "BranchingOne";
    case ErrorKind::NonPositiveMeasure: return "NonPositiveMeasure";
    case ErrorKind::MeasureMismatch: return "MeasureMismatch";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::Cycle: return "Cycle";
    case ErrorKind::ForeignLeaf: return "ForeignLeaf";
    case ErrorKind::NotDescendant: return "NotDescendant";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NegativeSymbol: return "NegativeSymbol";
    case ErrorKind::MissingSymbol: return "MissingSymbol";
    case ErrorKind::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace ultrafield
