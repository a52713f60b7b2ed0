#pragma once

#include <stdexcept>
#include <string>

namespace envar {

enum class ErrorKind {
  Dimension,
  Admissibility,
  Stability,
  Factorization,
  Rank,
  NotPositiveDefinite,
  InvalidConfig,
  Diverged,
  Generation,
  Parse,
  Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` lets callers map failures
/// to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace envar
