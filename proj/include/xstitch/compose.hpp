#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xstitch/features.hpp"
#include "xstitch/image.hpp"
#include "xstitch/masks.hpp"
#include "xstitch/order.hpp"
#include "xstitch/register.hpp"
#include "xstitch/seam.hpp"

namespace xstitch {

/// Global panorama extent in reference-frame coordinates. Canvas pixel
/// (c, r) sits at reference coordinate (bbox.x0 + c, bbox.y0 + r).
struct Canvas {
  BoundingBox bbox;
  Point2 offset;  // added to reference coordinates to obtain pixel indices

  int width() const { return bbox.pixel_width(); }
  int height() const { return bbox.pixel_height(); }
};

struct BlendConfig {
  double k = 0.5;     // sigmoid steepness per pixel
  double band = 6.0;  // weights saturate to 0/1 beyond this distance

  /// Throws kInvalidArgument unless k > 0 and band > 0.
  void validate() const;
};

/// Where precomputed feature maps come from for the seam feature term.
enum class FeatureSource { kBuiltin, kFile };

struct PipelineConfig {
  RegistrationConfig registration;
  SeamWeights weights;
  StitchAxis seam_axis = StitchAxis::kVertical;
  FeatureSource feature_source = FeatureSource::kBuiltin;
  BlendConfig blend;
  bool exact_order = false;
  std::optional<int> reference_override;

  void validate() const;
};

/// Union of the warped corners of every image, snapped outward to integers.
Canvas compute_canvas(const StitchPlan& plan, const std::vector<std::pair<int, int>>& extents);

/// Logistic function 1 / (1 + e^-x).
double sigmoid(double x);

/// Weight of image a at signed distance d from the seam: sigmoid(k d) inside
/// the band, exactly 1 or 0 beyond it.
double blend_weight(double d, const BlendConfig& cfg);

/// Fuses a and b across `seam`, whose coords give the seam position for every
/// step of the raster along the seam direction. `a_first` places a on the
/// side of smaller cross-axis coordinates (above a left-to-right seam, left of
/// a top-to-bottom seam). Where one input is valid it is copied; validity is
/// the union. Throws kExtentMismatch.
MaskedImage blend_pair(const MaskedImage& a, const MaskedImage& b, const SeamPath& seam,
                       const BlendConfig& cfg, bool a_first = true);

struct PairReport {
  int dst = 0;
  int src = 0;
  double energy = 0.0;
  ModelKind model_kind = ModelKind::kTranslation;
  int iterations = 0;
  int matches = 0;
};

struct FusionReport {
  int image = 0;         // image fused at this step
  int previous = 0;      // neighbour along the chain
  double seam_cost = 0.0;
  int seam_length = 0;
};

struct StitchReport {
  std::vector<int> order;
  int reference = 0;
  std::vector<Homography> chained;
  std::vector<PairReport> pairs;  // consecutive chain pairs
  std::vector<FusionReport> fusions;
  Canvas canvas;
  int edge_count = 0;  // registered ordered pairs in the energy matrix
  double elapsed_ms = 0.0;
};

struct StitchResult {
  MaskedImage panorama;
  StitchReport report;
};

/// Full pipeline. `features`, when non-empty, supplies one map per image for
/// the seam feature term (feature_source = file). Greedy ordering that dead
/// ends falls back to exact search for up to kMaxExactImages images.
StitchResult stitch_all(const std::vector<Image>& images, const std::vector<Mask>& masks,
                        const PipelineConfig& cfg = {},
                        const std::vector<FeatureMap>& features = {});

}  // namespace xstitch
