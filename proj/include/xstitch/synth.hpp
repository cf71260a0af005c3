#pragma once

#include <cstdint>
#include <vector>

#include "xstitch/homography.hpp"
#include "xstitch/masks.hpp"
#include "xstitch/register.hpp"

namespace xstitch {

/// SplitMix64 seeding a xoshiro256** stream. Uniforms take the top 53 bits;
/// normals use the Box-Muller cosine branch, one draw per pair of uniforms.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  int uniform_int(int lo, int hi);        // [lo, hi]
  double normal();

 private:
  std::uint64_t s_[4];
};

struct SynthSpec {
  int resolution = 512;
  int n_slices = 5;
  double overlap_fraction = 0.5;
  int n_screws_per_slice = 12;
  ModelKind warp_kind = ModelKind::kTranslation;
  double noise_sigma = 0.0;
  /// Scales the per-slice perturbation: 1 gives up to 5 degrees of rotation,
  /// 3% scale, 2% anisotropy and shear, or 2% corner displacement.
  double warp_magnitude = 1.0;
  std::uint64_t seed = 1;

  /// Throws kInfeasibleSpec on out-of-range fields.
  void validate() const;
};

struct Screw {
  Point2 centre;       // scene / reference-frame coordinates
  double semi_major;   // pixels
  double semi_minor;
  double angle;        // radians
};

struct SineWave {
  double kx, ky, phase, amplitude;
};

/// Procedural spine-like scene in reference-frame coordinates: smooth
/// background, curved bright column with periodic vertebra bands, fine
/// oriented texture, and bright elliptical screws.
class Scene {
 public:
  double width = 0;
  double background_phase[3] = {0, 0, 0};
  double curve_amplitude = 0;
  double curve_period = 1;
  double curve_phase = 0;
  double column_half_width = 1;
  double vertebra_period = 1;
  double vertebra_phase = 0;
  std::vector<SineWave> texture;
  std::vector<Screw> screws;  // sorted by centre.y

  double column_centre(double y) const;
  double intensity(Point2 p) const;
  /// Label (1-based index into screws) of the screw whose ellipse contains p, or 0.
  int screw_at(Point2 p) const;

 private:
  double screw_reach() const;
};

struct GroundTruth {
  Scene scene;
  Image panorama;                  // noiseless scene over the union of slice footprints
  Point2 panorama_origin;          // reference-frame coordinate of panorama pixel (0, 0)
  std::vector<Image> slices;       // shuffled
  std::vector<Mask> masks;         // aligned with slices
  std::vector<int> true_order;     // true_order[k] = slice index of the k-th image from the top
  std::vector<Homography> true_h;  // per slice: slice coordinates -> reference frame
  /// Per slice, the centres of its visible screws in slice coordinates,
  /// ordered by mask label.
  std::vector<std::vector<Point2>> screw_centres;
  std::vector<int> offsets;  // vertical offset of each slice in generation order
};

/// Deterministic for a fixed spec. The topmost slice is the reference frame
/// (its true_h is the identity); every screw lies either well inside or
/// outside each slice, and each slice sees exactly n_screws_per_slice.
/// Consecutive slices share as many screw rows as the layout allows, up to
/// half of a slice's rows.
GroundTruth generate(const SynthSpec& spec);

/// Resamples a ground-truth panorama (pixel (0, 0) at `origin` in the
/// generation frame) onto `bbox` in the frame of a slice whose true
/// homography is `reference_h`, so that a panorama stitched with that slice
/// as reference can be compared pixel for pixel.
MaskedImage ground_truth_view(const Image& panorama, Point2 origin, const Homography& reference_h,
                              const BoundingBox& bbox);

}  // namespace xstitch
