#pragma once

#include <stdexcept>
#include <string>

namespace ppca {

enum class ErrorKind {
  ZeroVariance,
  InvalidSpec,
  OutOfRange,
  DegenerateBasis,
  DimensionMismatch,
  KTooLarge,
  EigenFailure,
  RankDeficient,
  SingularWeight,
  RangeEmpty,
  NonStationary,
  InvalidInput,
};

const char* to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind. Input problems
/// (InvalidSpec, DimensionMismatch, InvalidInput, ...) and numerical
/// failures (EigenFailure, SingularWeight, ...) are told apart by is_numerical().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  bool is_numerical() const noexcept;

 private:
  ErrorKind kind_;
};

}  // namespace ppca
