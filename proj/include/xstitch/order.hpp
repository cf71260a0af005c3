#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xstitch/error.hpp"
#include "xstitch/register.hpp"

namespace xstitch {

/// Registration of image j onto image i, or the reason it has no edge.
struct PairEntry {
  std::optional<RegistrationResult> registration;
  std::optional<ErrorKind> failure;
  std::string message;

  bool ok() const noexcept { return registration.has_value(); }
};

/// e(i, j) = L_align of image j registered onto image i. Failed pairs carry
/// no edge (energy +inf) and are never traversed.
class PairwiseEnergyMatrix {
 public:
  PairwiseEnergyMatrix() = default;
  PairwiseEnergyMatrix(int n, std::vector<std::pair<int, int>> extents);

  int size() const noexcept { return n_; }
  const std::pair<int, int>& extent(int i) const { return extents_[static_cast<std::size_t>(i)]; }

  PairEntry& entry(int i, int j) { return entries_[index(i, j)]; }
  const PairEntry& entry(int i, int j) const { return entries_[index(i, j)]; }

  bool has_edge(int i, int j) const { return i != j && entry(i, j).ok(); }
  /// +inf when there is no edge.
  double energy(int i, int j) const;
  /// Homography mapping image j into image i's frame. Requires has_edge.
  const Homography& h(int i, int j) const;

  /// Test helper: a matrix with given energies and homographies.
  static PairwiseEnergyMatrix from_energies(const std::vector<std::vector<double>>& e);

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  int n_ = 0;
  std::vector<std::pair<int, int>> extents_;
  std::vector<PairEntry> entries_;
};

/// Registers every ordered pair. Pairs failing with kNoValidMatches,
/// kEmptyOverlap or kDegenerateConfiguration become edge-less entries, as do
/// registrations whose RMS residual exceeds the inlier radius, with fewer
/// than cfg.min_inliers inliers, or with more than one conflict per four
/// inliers.
PairwiseEnergyMatrix build_energy_matrix(const std::vector<CentroidSet>& centroid_sets,
                                         const RegistrationConfig& cfg = {});

/// Sum of e(order[k], order[k+1]); +inf if any edge is missing.
double path_energy(const PairwiseEnergyMatrix& m, const std::vector<int>& order);

/// Greedy open path: start from the globally cheapest edge, then repeatedly
/// attach the unvisited node with the cheapest edge to either end of the path.
/// Throws kDisconnectedSet when no edge can extend the path.
std::vector<int> order_greedy(const PairwiseEnergyMatrix& m);

inline constexpr int kMaxExactImages = 10;

/// Minimum-energy Hamiltonian path by enumeration; ties go to the
/// lexicographically smallest permutation. Throws kTooManyImages for n > 10
/// and kDisconnectedSet when no permutation has finite energy.
std::vector<int> order_exact(const PairwiseEnergyMatrix& m);

/// Direction along which consecutive shots are stacked.
enum class StitchAxis { kVertical, kHorizontal };

struct StitchPlan {
  std::vector<int> order;  // chain order, starting at the reference
  int reference = 0;
  std::vector<Homography> chained;  // indexed by image, maps into the reference frame
};

/// Displacement along `axis` of image j's centre when mapped into image i's
/// frame.
double axis_shift(const PairwiseEnergyMatrix& m, int i, int j, StitchAxis axis = StitchAxis::kVertical);

/// Chooses the chain end from which images step downward (rightward for a
/// horizontal axis) on average, i.e. the topmost image, unless
/// `reference_override` names one, then accumulates homographies along the
/// chain. Throws kAmbiguousOrientation when the mean step is below 1 pixel
/// and no override is given.
StitchPlan pick_reference_and_chain(const PairwiseEnergyMatrix& m, std::vector<int> order,
                                    std::optional<int> reference_override = std::nullopt,
                                    StitchAxis axis = StitchAxis::kVertical);

}  // namespace xstitch
