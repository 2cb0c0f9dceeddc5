#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpt {

enum class ErrorCode {
  NonPositiveWeight,
  SelfLoop,
  DuplicateEdge,
  IdOutOfRange,
  XNotInSet,
  GraphMismatch,
  SizeOverflow,
  EmptyBoundary,
  NonFinite,
  DisconnectedFreeComponent,
  WindowTooSmall,
  ClosureEscapesU,
  ZeroDenominator,
  X0OutsideOmega,
  Omega1NotSubset,
  SetsIntersect,
  TooManyFreeVertices,
  InvalidArgument,
  Parse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::IdOutOfRange: return "IdOutOfRange";
    case ErrorCode::XNotInSet: return "XNotInSet";
    case ErrorCode::GraphMismatch: return "GraphMismatch";
    case ErrorCode::SizeOverflow: return "SizeOverflow";
    case ErrorCode::EmptyBoundary: return "EmptyBoundary";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DisconnectedFreeComponent: return "DisconnectedFreeComponent";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::ClosureEscapesU: return "ClosureEscapesU";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::X0OutsideOmega: return "X0OutsideOmega";
    case ErrorCode::Omega1NotSubset: return "Omega1NotSubset";
    case ErrorCode::SetsIntersect: return "SetsIntersect";
    case ErrorCode::TooManyFreeVertices: return "TooManyFreeVertices";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace dpt
