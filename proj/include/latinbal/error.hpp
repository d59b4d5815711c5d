#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace latinbal {

enum class ErrorCode {
  DimensionMismatch,
  SymbolOutOfRange,
  RowViolation,
  ColumnViolation,
  NotABijection,
  IndexOutOfRange,
  IdenticalIndices,
  OrderTooSmall,
  OrderTooLarge,
  WrongResidue,
  WrongMode,
  InvariantViolation,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SymbolOutOfRange: return "SymbolOutOfRange";
    case ErrorCode::RowViolation: return "RowViolation";
    case ErrorCode::ColumnViolation: return "ColumnViolation";
    case ErrorCode::NotABijection: return "NotABijection";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::IdenticalIndices: return "IdenticalIndices";
    case ErrorCode::OrderTooSmall: return "OrderTooSmall";
    case ErrorCode::OrderTooLarge: return "OrderTooLarge";
    case ErrorCode::WrongResidue: return "WrongResidue";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `index()` carries the offending
/// row/column/position when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace latinbal
