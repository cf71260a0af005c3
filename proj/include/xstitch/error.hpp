#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace xstitch {

enum class ErrorKind {
  kProjectiveDivideByZero,
  kNonInvertibleResult,
  kSingularMatrix,
  kInvalidArgument,
  kEmptyOverlap,
  kDegenerateConfiguration,
  kNoValidMatches,
  kDisconnectedSet,
  kTooManyImages,
  kAmbiguousOrientation,
  kExtentMismatch,
  kFeatureMapMismatch,
  kDegenerateExtent,
  kTooSmall,
  kInfeasibleSpec,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;

/// Process exit status for a failure class; distinct for every class, never
/// 0, 1 or kExitUsage.
int exit_code(ErrorKind kind);

/// Every library failure is a StitchError carrying its class. Pipeline stages
/// attach the indices of the image pair that failed, when there is one.
class StitchError : public std::runtime_error {
 public:
  StitchError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  const std::optional<std::pair<int, int>>& pair() const noexcept { return pair_; }

  StitchError with_pair(int first, int second) const {
    StitchError copy(kind_, std::string(what()) + " (pair " + std::to_string(first) +
                                ", " + std::to_string(second) + ")");
    copy.pair_ = std::make_pair(first, second);
    return copy;
  }

 private:
  ErrorKind kind_;
  std::optional<std::pair<int, int>> pair_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw StitchError(kind, what);
}

}  // namespace xstitch
