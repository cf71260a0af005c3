#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "xstitch/image.hpp"

namespace xstitch {

/// Multi-channel feature raster, row-major with channels interleaved.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(int w, int h, int c)
      : width(w), height(h), channels(c), values(static_cast<std::size_t>(w) * h * c, 0.0f) {}

  float at(int x, int y, int ch) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
  float& at(int x, int y, int ch) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }

  /// Bilinear resize to (w, h) when the map is a strided version of an image
  /// of that size; an exact-size map is returned unchanged. Throws
  /// kFeatureMapMismatch if no integer stride s gives ceil(w/s) x ceil(h/s).
  FeatureMap resampled_to(int w, int h) const;

  /// Rectangle [x, x+w) x [y, y+h).
  FeatureMap crop(int x, int y, int w, int h) const;
};

/// Source of per-pixel feature responses for the feature energy term.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual FeatureMap extract(const Image& img) const = 0;
};

/// Half-wave rectified directional derivatives at eight orientations
/// (multiples of 45 degrees), each smoothed by a Gaussian of sigma 2.
class OrientedGradientExtractor final : public FeatureExtractor {
 public:
  static constexpr int kOrientations = 8;
  explicit OrientedGradientExtractor(double sigma = 2.0) : sigma_(sigma) {}
  FeatureMap extract(const Image& img) const override;

 private:
  double sigma_;
};

/// Separable Gaussian blur with clamped borders, truncated at 3 sigma.
std::vector<double> gaussian_blur(std::span<const double> plane, int width, int height, double sigma);

/// Feature-map file: "XSFM" magic, then little-endian uint32 version (1),
/// width, height, channels, then width*height*channels little-endian float32
/// values, row-major, channel-interleaved.
FeatureMap load_feature_map(const std::filesystem::path& path);
void save_feature_map(const std::filesystem::path& path, const FeatureMap& map);

}  // namespace xstitch
