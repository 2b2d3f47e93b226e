#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ultrafield {

enum class ErrorKind {
  MalformedSpec,
  BranchingOne,
  NonPositiveMeasure,
  MeasureMismatch,
  DuplicateId,
  Cycle,
  ForeignLeaf,
  NotDescendant,
  OutOfRange,
  DimensionMismatch,
  NegativeSymbol,
  MissingSymbol,
  ZeroEigenvalue,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable kind; what() is a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ultrafield
