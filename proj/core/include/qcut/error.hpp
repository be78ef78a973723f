#pragma once

#include <stdexcept>
#include <string>

namespace qcut {

// Category of a failure, used by callers (and the CLI) to decide between
// "bad input" and "something went wrong while running".
enum class ErrorKind {
  InvalidArgument,   // bad value passed to an API
  Parse,             // malformed text input (QASM, JSON)
  Validation,        // structurally valid input violating a domain rule
  Capacity,          // problem size exceeds a supported limit
  Cut,               // cut specification cannot be applied to the circuit
  IncompleteResults, // reconstruction is missing required variant results
  DegenerateScores,  // score set unusable (e.g. all-zero weights)
  Calibration,       // fake-circuit calibration could not hit its target
  Config,            // experiment configuration rejected (field named in message)
  Job,               // failure while executing a job
  Io,                // filesystem / socket failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Validation: return "validation-error";
    case ErrorKind::Capacity: return "capacity-error";
    case ErrorKind::Cut: return "cut-error";
    case ErrorKind::IncompleteResults: return "incomplete-results";
    case ErrorKind::DegenerateScores: return "degenerate-scores";
    case ErrorKind::Calibration: return "calibration-error";
    case ErrorKind::Config: return "config-error";
    case ErrorKind::Job: return "job-error";
    case ErrorKind::Io: return "io-error";
  }
  return "error";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace qcut
