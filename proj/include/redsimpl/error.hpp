#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace redsimpl {

/// Every failure the engine can report. Names mirror the contract codes so
/// that CLI diagnostics and tests can match on them.
enum class ErrorCode {
  EmptyDomain,
  OutOfRange,
  DimensionMismatch,
  Unbounded,
  RadiusExhausted,
  NotInLattice,
  NotAChild,
  NonAffineAccess,
  RecursiveDefinition,
  SyntaxError,
  InvalidProgram,
  NoReuse,
  NeedsInverse,
  AccumulationReuse,
  Degenerate,
  DependentIndex,
  NonCanonicalProjection,
  NotDistributive,
  NotInvariant,
  BudgetExceeded,
  FitMismatch,
  InsufficientSamples,
  Cycle,
  DomainHole,
  UnboundInput,
  SignatureMismatch,
  UnsupportedScalar,
  Overflow,
};

inline std::string_view error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::EmptyDomain: return "EMPTY_DOMAIN";
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::Unbounded: return "UNBOUNDED";
    case ErrorCode::RadiusExhausted: return "RADIUS_EXHAUSTED";
    case ErrorCode::NotInLattice: return "NOT_IN_LATTICE";
    case ErrorCode::NotAChild: return "NOT_A_CHILD";
    case ErrorCode::NonAffineAccess: return "NON_AFFINE_ACCESS";
    case ErrorCode::RecursiveDefinition: return "RECURSIVE_DEFINITION";
    case ErrorCode::SyntaxError: return "SYNTAX_ERROR";
    case ErrorCode::InvalidProgram: return "INVALID_PROGRAM";
    case ErrorCode::NoReuse: return "NO_REUSE";
    case ErrorCode::NeedsInverse: return "NEEDS_INVERSE";
    case ErrorCode::AccumulationReuse: return "ACCUMULATION_REUSE";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::DependentIndex: return "DEPENDENT_INDEX";
    case ErrorCode::NonCanonicalProjection: return "NON_CANONICAL_PROJECTION";
    case ErrorCode::NotDistributive: return "NOT_DISTRIBUTIVE";
    case ErrorCode::NotInvariant: return "NOT_INVARIANT";
    case ErrorCode::BudgetExceeded: return "BUDGET_EXCEEDED";
    case ErrorCode::FitMismatch: return "FIT_MISMATCH";
    case ErrorCode::InsufficientSamples: return "INSUFFICIENT_SAMPLES";
    case ErrorCode::Cycle: return "CYCLE";
    case ErrorCode::DomainHole: return "DOMAIN_HOLE";
    case ErrorCode::UnboundInput: return "UNBOUND_INPUT";
    case ErrorCode::SignatureMismatch: return "SIGNATURE_MISMATCH";
    case ErrorCode::UnsupportedScalar: return "UNSUPPORTED_SCALAR";
    case ErrorCode::Overflow: return "OVERFLOW";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace redsimpl
