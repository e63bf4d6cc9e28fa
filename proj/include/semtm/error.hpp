#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semtm {

enum class ErrorCode {
  // malformed user input
  BadLiteral,
  OutOfCarrier,
  UnknownSemiring,
  SyntaxError,
  UnknownSymbol,
  ArityMismatch,
  MalformedFile,
  // domain errors
  MixedSemirings,
  LetterNotInInputAlphabet,
  NotApplicable,
  BudgetExceeded,
  InvalidMachine,
  SignatureMismatch,
  TooLarge,
  UnresolvedSurrogate,
  UnknownNamedSurrogate,
  UnsupportedConstruct,
  NotWESO,
  OracleTransitionsPresent,
  BoundTooSmall,
  ArityTooSmall,
  AlphabetMismatch,
};

std::string_view error_code_name(ErrorCode code);

/// True for codes that describe unparseable or ill-formed user input rather
/// than a failure of a well-formed computation.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semtm
