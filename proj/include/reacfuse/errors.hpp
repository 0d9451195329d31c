#ifndef REACFUSE_ERRORS_HPP
#define REACFUSE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reacfuse {

// Base for all typed errors. `code` is a stable machine-readable tag
// (e.g. "SequenceTooLong"); `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

// Bad or inconsistent configuration. CLI exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Bad input data (parse failures, schema violations, missing files). Exit code 3.
class DataError : public Error {
public:
  using Error::Error;
};

// Numeric failure (NaN/Inf guard, degenerate reductions). Exit code 4.
class NumericError : public Error {
public:
  using Error::Error;
};

// Shape/vocab mismatches between tensors or model components.
class ShapeError : public Error {
public:
  using Error::Error;
};

enum class ParseErrorKind {
  EmptyInput,
  UnknownElement,
  UnbalancedParenthesis,
  UnclosedRingBond,
  MalformedBracket,
  DanglingBond,
  DuplicateBond,
  UnsupportedFeature,  // aromatic atoms, stereo marks, isotopes
  MultipleProducts,
  MissingSegment,
  BadCharacter,
};

const char* parse_error_kind_name(ParseErrorKind k);

// Reaction-notation parse failure; `offset` is the byte position in the input.
class ParseError : public DataError {
public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& msg)
      : DataError(parse_error_kind_name(kind),
                  msg + " (at byte " + std::to_string(offset) + ")"),
        kind_(kind), offset_(offset) {}
  ParseErrorKind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

inline const char* parse_error_kind_name(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::EmptyInput: return "EmptyInput";
    case ParseErrorKind::UnknownElement: return "UnknownElement";
    case ParseErrorKind::UnbalancedParenthesis: return "UnbalancedParenthesis";
    case ParseErrorKind::UnclosedRingBond: return "UnclosedRingBond";
    case ParseErrorKind::MalformedBracket: return "MalformedBracket";
    case ParseErrorKind::DanglingBond: return "DanglingBond";
    case ParseErrorKind::DuplicateBond: return "DuplicateBond";
    case ParseErrorKind::UnsupportedFeature: return "UnsupportedFeature";
    case ParseErrorKind::MultipleProducts: return "MultipleProducts";
    case ParseErrorKind::MissingSegment: return "MissingSegment";
    case ParseErrorKind::BadCharacter: return "BadCharacter";
  }
  return "ParseError";
}

}  // namespace reacfuse

#endif
