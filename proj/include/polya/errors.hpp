#pragma once

#include <stdexcept>
#include <string>

namespace polya {

// Failure modes that callers are expected to branch on. Rejection of an
// equation is *not* an error (it is a Certificate value); these are the
// conditions that abort a computation.
enum class ErrorKind {
  InvalidArgument,       // bad parameter (negative x, zero order, ...)
  NegativeCoefficient,   // a DOM series was handed a negative value
  NoConstantPart,        // every summand of the equation mentions w
  NonStabilization,      // fixpoint iteration read an unavailable coefficient
  ZeroSolution,          // solution prefix is identically zero
  NotElementary,         // operator-side (d,q) formula needs a plethysm-free term
  OrderTooLow,           // series prefix insufficient for requested tolerance
  DivergentEvaluation,   // tail ratio >= 1 during numeric evaluation
  NoCriticalPoint,       // bisection never bracketed the characteristic point
  PrecisionLoss,         // tail bounds exceed tolerance at the candidate rho
  DegenerateSecondDerivative,
  InsufficientSupportPoints,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NegativeCoefficient: return "NegativeCoefficient";
    case ErrorKind::NoConstantPart: return "NoConstantPart";
    case ErrorKind::NonStabilization: return "NonStabilization";
    case ErrorKind::ZeroSolution: return "ZeroSolution";
    case ErrorKind::NotElementary: return "NotElementary";
    case ErrorKind::OrderTooLow: return "OrderTooLow";
    case ErrorKind::DivergentEvaluation: return "DivergentEvaluation";
    case ErrorKind::NoCriticalPoint: return "NoCriticalPoint";
    case ErrorKind::PrecisionLoss: return "PrecisionLoss";
    case ErrorKind::DegenerateSecondDerivative: return "DegenerateSecondDerivative";
    case ErrorKind::InsufficientSupportPoints: return "InsufficientSupportPoints";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

}  // namespace polya
