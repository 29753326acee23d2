#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfcalib {

/// Failure categories raised by the library. Every thrown lfcalib::Error
/// carries one of these so callers (and the CLI exit-code mapping) can
/// dispatch without parsing messages.
enum class ErrorKind {
  InvalidArgument,
  DegenerateProjection,
  ParallelRays,
  RankDeficient,
  InvalidSpacing,
  AspectMismatch,
  InvalidIntrinsics,
  NoConvergence,
  DegenerateBoard,
  InsufficientRays,
  NullspaceAmbiguous,
  NotPositiveDefinite,
  ZeroScale,
  NoParallax,
  NonFinite,
  InsufficientPoses,
  ConfigInvalid,
  AllPointsBehindCamera,
  Io,
  Inconsistent,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Re-throws `e` with `context` prepended to its message, keeping the kind.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace lfcalib
