#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "xstitch/homography.hpp"
#include "xstitch/masks.hpp"

namespace xstitch {

/// Transform families in increasing number of degrees of freedom.
enum class ModelKind { kTranslation = 0, kSimilarity = 1, kAffine = 2, kProjective = 3 };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Fewest correspondences each family needs.
int minimum_pairs(ModelKind kind);

struct PointPair {
  Point2 src;  // in I2
  Point2 dst;  // in I1
};

struct Correspondence {
  int src_index = 0;  // into I2's centroids
  int dst_index = 0;  // into I1's centroids
  double distance = 0.0;
};

struct RegistrationConfig {
  double tol_energy = 1e-6;  // pixels^2
  int max_iters = 100;
  double gate_radius_fraction = 0.25;  // of I1's diagonal
  bool allow_projective = true;
  /// A warped I2 centroid within this fraction of I1's diagonal of an I1
  /// centroid counts as an inlier (1 pixel for sets without an extent).
  double inlier_radius_fraction = 0.004;
  /// Fewest inliers for a registration to count as a real overlap when the
  /// pairwise energy matrix is built.
  int min_inliers = 3;
  /// Non-translation fits whose corners stray further than this fraction of
  /// I2's larger side from the closest similarity, or that scale I2 outside
  /// [0.9, 1.1], are rejected in favour of a simpler model.
  double max_distortion_fraction = 0.04;
  /// Per-coordinate centroid noise in pixels, used for model selection when
  /// the matches leave no spare degrees of freedom to estimate it from. A
  /// simpler model is preferred when the residual it adds over the richest
  /// fit is consistent with the noise level.
  double centroid_noise = 0.1;
  /// Kinds above translation whose predicted corner standard deviation under
  /// that noise exceeds this many pixels are too poorly conditioned to use.
  double max_corner_sigma = 0.25;
};

struct RegistrationResult {
  Homography h;  // maps I2 coordinates into I1's frame
  double energy = 0.0;
  int iterations = 0;
  ModelKind model_kind = ModelKind::kTranslation;
  std::vector<double> energy_history;  // initial value first
  int matches = 0;                     // gated correspondences behind the final fit
  int overlap_count = 0;               // warped I2 centroids counted by the energy
  int inliers = 0;    // one-to-one matches within the inlier radius
  int conflicts = 0;  // centroids in the mutual overlap left without a partner

  double rms() const;
};

/// Centroid overlap test shared by the energy and the matcher. A warped I2
/// centroid is in the overlap when it lies at least `inset` pixels inside
/// I1's raster. Sets with no extent (width or height 0) are unbounded.
bool in_overlap(const CentroidSet& dst, Point2 p, double inset);

/// Inset used by register_pair: instances closer than their own radius to
/// I1's border may be truncated or missing there.
double overlap_inset(const CentroidSet& dst);

/// Sum over warped I2 centroids of the squared distance to the nearest I1
/// centroid. With `overlap_only`, only centroids in the overlap count and an
/// empty overlap throws kEmptyOverlap.
double align_energy(const CentroidSet& c1, const CentroidSet& c2, const Homography& h,
                    bool overlap_only, double inset = 0.0);

/// Least-squares transform of the given family with H(src) ~ dst. Projective
/// fits use the Hartley-normalized DLT followed by Gauss-Newton refinement of
/// the geometric error. Throws kDegenerateConfiguration on rank deficiency
/// and kInvalidArgument when there are too few pairs.
Homography estimate_transform(std::span<const PointPair> pairs, ModelKind kind);

/// Nearest-neighbour correspondences for warped I2 centroids in the overlap,
/// within `gate` pixels, one per I2 centroid and one per I1 centroid (closest
/// wins).
std::vector<Correspondence> match_centroids(const CentroidSet& c1, const CentroidSet& c2,
                                            const Homography& h, double gate, double inset);

/// Inliers and conflicts of `h` as stored in RegistrationResult. A conflict is
/// a centroid of either set that lands inside the other raster (inset by that
/// raster's instance radius) without an inlier partner.
std::pair<int, int> consensus(const CentroidSet& c1, const CentroidSet& c2, const Homography& h,
                              double radius);

/// ICP minimization of align_energy, alternating matching and re-estimation
/// at the richest admissible model. Updates that would raise the energy are
/// rejected, so energy_history is non-increasing. ICP runs from the
/// mean-aligned translation and from every translation taking one I2 centroid
/// onto one I1 centroid; the run with the best inliers minus conflicts wins,
/// then the lowest energy, then the earliest start. Throws kNoValidMatches
/// when no start has a match.
RegistrationResult register_pair(const CentroidSet& c1, const CentroidSet& c2,
                                 const RegistrationConfig& cfg = {});

}  // namespace xstitch
