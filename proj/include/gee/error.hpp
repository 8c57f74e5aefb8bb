#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gee {

enum class ErrorKind {
  InvalidAlphabet,
  InvalidPmf,
  DegenerateAlternative,
  InvalidSubset,
  Dimension,
  AbsoluteContinuity,
  Evaluation,
  InvalidInput,
  NeedsCounts,
  InvalidThreshold,
  InvalidEps,
  InvalidKappa,
  CannotTakeLog,
  OracleTooLarge,
  Scaling,
  Infeasible,
  Domain,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Non-fatal diagnostics (threshold clamping, low expected counts).
/// Defaults to stderr; the sink can be replaced, e.g. silenced in tests.
using WarningSink = void (*)(std::string_view);
void set_warning_sink(WarningSink sink) noexcept;
void warn(std::string_view message);

}  // namespace gee
