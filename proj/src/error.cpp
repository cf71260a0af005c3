#include "xstitch/error.hpp"

namespace xstitch {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kProjectiveDivideByZero: return "ProjectiveDivideByZero";
    case ErrorKind::kNonInvertibleResult: return "NonInvertibleResult";
    case ErrorKind::kSingularMatrix: return "SingularMatrix";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kEmptyOverlap: return "EmptyOverlap";
    case ErrorKind::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::kNoValidMatches: return "NoValidMatches";
    case ErrorKind::kDisconnectedSet: return "DisconnectedSet";
    case ErrorKind::kTooManyImages: return "TooManyImages";
    case ErrorKind::kAmbiguousOrientation: return "AmbiguousOrientation";
    case ErrorKind::kExtentMismatch: return "ExtentMismatch";
    case ErrorKind::kFeatureMapMismatch: return "FeatureMapMismatch";
    case ErrorKind::kDegenerateExtent: return "DegenerateExtent";
    case ErrorKind::kTooSmall: return "TooSmall";
    case ErrorKind::kInfeasibleSpec: return "InfeasibleSpec";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kConfig: return "Config";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyOverlap: return 2;
    case ErrorKind::kDisconnectedSet: return 3;
    case ErrorKind::kDegenerateConfiguration: return 4;
    case ErrorKind::kIo: return 5;
    case ErrorKind::kConfig: return 6;
    case ErrorKind::kNoValidMatches: return 7;
    case ErrorKind::kAmbiguousOrientation: return 8;
    case ErrorKind::kExtentMismatch: return 9;
    case ErrorKind::kFeatureMapMismatch: return 10;
    case ErrorKind::kInfeasibleSpec: return 11;
    case ErrorKind::kTooManyImages: return 12;
    case ErrorKind::kTooSmall: return 13;
    case ErrorKind::kDegenerateExtent: return 14;
    case ErrorKind::kSingularMatrix: return 15;
    case ErrorKind::kNonInvertibleResult: return 16;
    case ErrorKind::kProjectiveDivideByZero: return 17;
    case ErrorKind::kInvalidArgument: return 18;
  }
  return kExitInternal;
}

}  // namespace xstitch
