#include "xstitch/homography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xstitch/error.hpp"

namespace xstitch {

Homography::Homography(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) fail(ErrorKind::kSingularMatrix, "homography has non-finite entries");
  if (std::abs(m(2, 2)) < kHomographyEpsilon) {
    fail(ErrorKind::kSingularMatrix, "homography bottom-right entry is ~0");
  }
  m_ = m / m(2, 2);
  if (std::abs(m_.determinant()) < kHomographyEpsilon) {
    fail(ErrorKind::kSingularMatrix, "homography is not invertible");
  }
}

Homography Homography::translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

Homography Homography::scaling(double sx, double sy) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = sx;
  m(1, 1) = sy;
  return Homography(m);
}

Homography Homography::from_rows(const std::array<double, 9>& rows) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = rows[static_cast<std::size_t>(i)];
  return Homography(m);
}

std::array<double, 9> Homography::to_rows() const {
  std::array<double, 9> rows{};
  for (int i = 0; i < 9; ++i) rows[static_cast<std::size_t>(i)] = m_(i / 3, i % 3);
  return rows;
}

Point2 apply_homography(const Homography& h, Point2 p) {
  const auto& m = h.matrix();
  const double u = m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2);
  const double v = m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2);
  const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
  if (std::abs(w) < kHomographyEpsilon) {
    fail(ErrorKind::kProjectiveDivideByZero, "point maps to the line at infinity");
  }
  if (w == 1.0) return {u, v};
  return {u / w, v / w};
}

Homography compose(const Homography& h1, const Homography& h2) {
  const Eigen::Matrix3d product = h1.matrix() * h2.matrix();
  try {
    return Homography(product);
  } catch (const StitchError&) {
    fail(ErrorKind::kNonInvertibleResult, "composed homography is singular");
  }
}

Homography invert(const Homography& h) {
  const Eigen::Matrix3d& m = h.matrix();
  const double det = m.determinant();
  if (std::abs(det) < kHomographyEpsilon) fail(ErrorKind::kSingularMatrix, "homography is singular");
  // Pure translations invert exactly; this keeps integer shifts bit-exact.
  if (m(0, 0) == 1.0 && m(0, 1) == 0.0 && m(1, 0) == 0.0 && m(1, 1) == 1.0 && m(2, 0) == 0.0 &&
      m(2, 1) == 0.0) {
    return Homography::translation(-m(0, 2), -m(1, 2));
  }
  return Homography(m.inverse());
}

double max_entry_difference(const Homography& a, const Homography& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

double max_corner_error(const Homography& a, const Homography& b, int width, int height) {
  const Point2 corners[] = {{0.0, 0.0},
                            {static_cast<double>(width), 0.0},
                            {0.0, static_cast<double>(height)},
                            {static_cast<double>(width), static_cast<double>(height)}};
  double worst = 0.0;
  for (Point2 c : corners) {
    worst = std::max(worst, std::sqrt(squared_distance(apply_homography(a, c), apply_homography(b, c))));
  }
  return worst;
}

BoundingBox warped_bounds(const Homography& h, int width, int height) {
  const Point2 corners[] = {{0.0, 0.0},
                            {static_cast<double>(width), 0.0},
                            {0.0, static_cast<double>(height)},
                            {static_cast<double>(width), static_cast<double>(height)}};
  const Point2 first = apply_homography(h, corners[0]);
  BoundingBox box{first.x, first.y, first.x, first.y};
  for (Point2 c : corners) box.expand_to(apply_homography(h, c));
  return box;
}

}  // namespace xstitch
