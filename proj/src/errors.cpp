#include "lfcalib/errors.hpp"

namespace lfcalib {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::ParallelRays: return "ParallelRays";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::InvalidSpacing: return "InvalidSpacing";
    case ErrorKind::AspectMismatch: return "AspectMismatch";
    case ErrorKind::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateBoard: return "DegenerateBoard";
    case ErrorKind::InsufficientRays: return "InsufficientRays";
    case ErrorKind::NullspaceAmbiguous: return "NullspaceAmbiguous";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ZeroScale: return "ZeroScale";
    case ErrorKind::NoParallax: return "NoParallax";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InsufficientPoses: return "InsufficientPoses";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::AllPointsBehindCamera: return "AllPointsBehindCamera";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Inconsistent: return "Inconsistent";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void rethrow_with_context(const Error& e, const std::string& context) {
  std::string what = e.what();
  // Strip the "<Kind>: " prefix so it is not repeated.
  const std::string prefix = std::string(to_string(e.kind())) + ": ";
  if (what.rfind(prefix, 0) == 0) what = what.substr(prefix.size());
  throw Error(e.kind(), context + ": " + what);
}

}  // namespace lfcalib
