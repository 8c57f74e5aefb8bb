#include "gee/error.hpp"

#include <iostream>

namespace gee {

namespace {

void default_sink(std::string_view message) { std::cerr << "warning: " << message << '\n'; }

WarningSink g_sink = &default_sink;

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidAlphabet: return "invalid-alphabet";
    case ErrorKind::InvalidPmf: return "invalid-pmf";
    case ErrorKind::DegenerateAlternative: return "degenerate-alternative";
    case ErrorKind::InvalidSubset: return "invalid-subset";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::AbsoluteContinuity: return "absolute-continuity";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::NeedsCounts: return "needs-counts";
    case ErrorKind::InvalidThreshold: return "invalid-threshold";
    case ErrorKind::InvalidEps: return "invalid-eps";
    case ErrorKind::InvalidKappa: return "invalid-kappa";
    case ErrorKind::CannotTakeLog: return "cannot-take-log";
    case ErrorKind::OracleTooLarge: return "oracle-too-large";
    case ErrorKind::Scaling: return "scaling";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Domain: return "domain";
  }
  return "unknown";
}

void set_warning_sink(WarningSink sink) noexcept { g_sink = sink ? sink : &default_sink; }

void warn(std::string_view message) { g_sink(message); }

}  // namespace gee
