#pragma once

#include <vector>

#include "xstitch/features.hpp"
#include "xstitch/image.hpp"

namespace xstitch {

/// Non-negative per-pixel costs over an overlap region, row-major.
struct EnergyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  EnergyMap() = default;
  EnergyMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }

  EnergyMap transposed() const;
};

/// kTopToBottom: one column per row, the seam runs down the map.
/// kLeftToRight: one row per column, the seam runs across the map.
enum class SeamDirection { kTopToBottom, kLeftToRight };

struct SeamPath {
  SeamDirection direction = SeamDirection::kTopToBottom;
  std::vector<int> coords;  // cross-axis coordinate per step
  double cost = 0.0;        // sum of energies along the path
};

struct SeamWeights {
  double lambda_color = 1.0;
  double lambda_grad = 1.0;
  double lambda_feat = 0.5;

  /// Throws kInvalidArgument unless all weights are >= 0 and one is > 0.
  void validate() const;
};

EnergyMap color_energy(const Image& a, const Image& b);

/// (D_a - D_b)^2 with D = gx^2 + gy^2 from central differences (one-sided at
/// the borders).
EnergyMap gradient_energy(const Image& a, const Image& b);

EnergyMap feature_energy(const Image& a, const Image& b, const FeatureExtractor& extractor);
/// Squared feature difference summed over channels; maps are resampled to
/// (width, height) first.
EnergyMap feature_energy(const FeatureMap& fa, const FeatureMap& fb, int width, int height);

EnergyMap hybrid_energy(const Image& a, const Image& b, const SeamWeights& w,
                        const FeatureExtractor& extractor);
/// Same, with the feature term taken from precomputed maps.
EnergyMap hybrid_energy(const Image& a, const Image& b, const SeamWeights& w,
                        const FeatureMap& fa, const FeatureMap& fb);

/// Minimum-cost 8-connected monotone path by dynamic programming:
/// C(r, c) = e(r, c) + min(C(r-1, c-1), C(r-1, c), C(r-1, c+1)), backtracked
/// from the cheapest end. Ties go to the smaller cross-axis index. Throws
/// kDegenerateExtent when the map has a single step along the seam.
SeamPath find_seam(const EnergyMap& e, SeamDirection direction = SeamDirection::kTopToBottom);

/// Sum of energies visited by the path, accumulated from its first step.
double seam_cost(const EnergyMap& e, const SeamPath& seam);

namespace reference {
EnergyMap hybrid_energy(const Image& a, const Image& b, const SeamWeights& w,
                        const FeatureExtractor& extractor);
}  // namespace reference

}  // namespace xstitch
