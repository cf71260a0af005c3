#pragma once

#include <cstdint>
#include <vector>

#include "xstitch/image.hpp"

namespace xstitch {

/// Instance label raster: 0 is background, 1..K are screw instances.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height);
  /// Validates that labels are non-negative and contiguous in {0..K}.
  Mask(int width, int height, std::vector<std::int32_t> labels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int label_count() const noexcept { return count_; }

  std::int32_t at(int x, int y) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<std::int32_t>& labels() const noexcept { return labels_; }

  /// 0/1 raster of the foreground.
  Mask binarized() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int count_ = 0;
  std::vector<std::int32_t> labels_;
};

/// One centroid per instance (index k-1 holds label k), plus the extent of the
/// source raster and the largest instance radius, which registration uses to
/// keep away from image borders.
struct CentroidSet {
  std::vector<Point2> points;
  int width = 0;
  int height = 0;
  double max_instance_radius = 0.0;

  bool empty() const noexcept { return points.empty(); }
  std::size_t size() const noexcept { return points.size(); }
  Point2 mean() const;
};

/// 8-connected components of a {0,1} raster, labelled 1..K in scan order of
/// their first pixel; components with fewer than min_area pixels are dropped.
Mask connected_components(const Mask& binary, int min_area);

/// Unweighted mean of each instance's pixel coordinates.
CentroidSet extract_centroids(const Mask& mask);

/// Threshold (value >= threshold) then connected_components.
Mask fallback_segment(const Image& img, double threshold, int min_area);

/// Removes instances touching the raster border and relabels the rest in
/// scan order. Truncated instances have biased centroids.
Mask drop_border_instances(const Mask& mask);

/// 20 pixels at 512x512, scaled by (resolution / 512)^2.
int default_min_area(int width, int height);

}  // namespace xstitch
