#pragma once

#include <Eigen/Dense>
#include <array>

#include "xstitch/image.hpp"

namespace xstitch {

/// Planar projective transform, stored normalized so that m(2,2) == 1.
class Homography {
 public:
  /// Identity.
  Homography() : m_(Eigen::Matrix3d::Identity()) {}

  /// Normalizes by the bottom-right entry. Throws kSingularMatrix when that
  /// entry is ~0 or the matrix is not invertible.
  explicit Homography(const Eigen::Matrix3d& m);

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty);
  static Homography scaling(double sx, double sy);
  static Homography from_rows(const std::array<double, 9>& rows);

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }
  double determinant() const { return m_.determinant(); }

  std::array<double, 9> to_rows() const;

 private:
  Eigen::Matrix3d m_;
};

inline constexpr double kHomographyEpsilon = 1e-12;

/// (u/w, v/w) for (u, v, w) = H (x, y, 1). Throws kProjectiveDivideByZero
/// when |w| < 1e-12.
Point2 apply_homography(const Homography& h, Point2 p);

/// Matrix product h1 * h2 (apply h2 first). Throws kNonInvertibleResult.
Homography compose(const Homography& h1, const Homography& h2);

/// Throws kSingularMatrix when |det| < 1e-12.
Homography invert(const Homography& h);

/// Largest per-entry absolute difference of the normalized matrices.
double max_entry_difference(const Homography& a, const Homography& b);

/// Largest displacement between where a and b send the corners of a
/// width x height raster.
double max_corner_error(const Homography& a, const Homography& b, int width, int height);

/// Axis-aligned bounds of the four raster corners (0,0), (w,0), (0,h), (w,h)
/// after mapping through h.
BoundingBox warped_bounds(const Homography& h, int width, int height);

}  // namespace xstitch
