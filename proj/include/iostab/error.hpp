#pragma once

#include <stdexcept>
#include <string>

namespace iostab {

enum class ErrorKind {
  kDimension,
  kSolver,
  kNoUniqueSolution,
  kCapacity,
  kNotObservable,
  kAssumption,
  kExcitation,
  kConditioning,
  kInput,
  kInfeasible,
  kConfig,
};

const char* to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported through this type.
/// The kind lets callers (the CLI in particular) map failures to exit codes
/// without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kSolver: return "solver error";
    case ErrorKind::kNoUniqueSolution: return "no unique solution";
    case ErrorKind::kCapacity: return "capacity error";
    case ErrorKind::kNotObservable: return "not observable";
    case ErrorKind::kAssumption: return "assumption violated";
    case ErrorKind::kExcitation: return "excitation failure";
    case ErrorKind::kConditioning: return "conditioning error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kConfig: return "config error";
  }
  return "error";
}

}  // namespace iostab
