#include "topemb/error.hpp"

namespace topemb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::CorruptPayload: return "CorruptPayload";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::TooFewClusters: return "TooFewClusters";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace topemb
