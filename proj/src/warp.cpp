#include "xstitch/warp.hpp"

#include <algorithm>
#include <cmath>

#include "xstitch/error.hpp"

namespace xstitch {

namespace {

constexpr double kCoordSnap = 1e-9;

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kCoordSnap ? r : v;
}

struct InverseMap {
  Eigen::Matrix3d m;
  double x0;
  double y0;
};

// Writes one canvas row.
void warp_row(const Image& src, const InverseMap& inv, int r, MaskedImage& out) {
  const double max_x = src.width() - 1;
  const double max_y = src.height() - 1;
  const double y = inv.y0 + r;
  const auto& m = inv.m;
  auto dst = out.image.row(r);
  for (int c = 0; c < out.image.width(); ++c) {
    const double x = inv.x0 + c;
    const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
    bool valid = false;
    double value = 0.0;
    if (std::abs(w) >= kHomographyEpsilon) {
      double sx = (m(0, 0) * x + m(0, 1) * y + m(0, 2));
      double sy = (m(1, 0) * x + m(1, 1) * y + m(1, 2));
      if (w != 1.0) {
        sx /= w;
        sy /= w;
      }
      sx = snap(sx);
      sy = snap(sy);
      if (sx >= 0.0 && sy >= 0.0 && sx <= max_x && sy <= max_y) {
        valid = true;
        value = sample_bilinear(src, sx, sy);
      }
    }
    dst[static_cast<std::size_t>(c)] = value;
    out.valid.set(c, r, valid);
  }
}

MaskedImage prepare(const Image& src, const Homography& h, const BoundingBox& canvas,
                    InverseMap& inv) {
  if (canvas.degenerate()) fail(ErrorKind::kInvalidArgument, "degenerate warp canvas");
  if (src.empty()) fail(ErrorKind::kInvalidArgument, "empty source image");
  inv = {invert(h).matrix(), canvas.x0, canvas.y0};
  const int w = canvas.pixel_width();
  const int hgt = canvas.pixel_height();
  return {Image(w, hgt), ValidityMask(w, hgt, false)};
}

}  // namespace

double sample_bilinear(const Image& src, double x, double y) {
  const int x0 = std::min(static_cast<int>(std::floor(x)), src.width() - 1);
  const int y0 = std::min(static_cast<int>(std::floor(y)), src.height() - 1);
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = src.at(x0, y0) + fx * (src.at(x1, y0) - src.at(x0, y0));
  const double bottom = src.at(x0, y1) + fx * (src.at(x1, y1) - src.at(x0, y1));
  if (fx == 0.0 && fy == 0.0) return src.at(x0, y0);
  const double v = top + fy * (bottom - top);
  // Lerp rounding can leave the hull of the corners by an ulp.
  const double lo = std::min({src.at(x0, y0), src.at(x1, y0), src.at(x0, y1), src.at(x1, y1)});
  const double hi = std::max({src.at(x0, y0), src.at(x1, y0), src.at(x0, y1), src.at(x1, y1)});
  return std::clamp(v, lo, hi);
}

MaskedImage warp_image(const Image& src, const Homography& h, const BoundingBox& canvas) {
  InverseMap inv;
  MaskedImage out = prepare(src, h, canvas, inv);
  const int rows = out.image.height();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) warp_row(src, inv, r, out);
  return out;
}

namespace reference {

MaskedImage warp_image(const Image& src, const Homography& h, const BoundingBox& canvas) {
  if (canvas.degenerate()) fail(ErrorKind::kInvalidArgument, "degenerate warp canvas");
  const Homography inv = invert(h);
  const int w = canvas.pixel_width();
  const int hgt = canvas.pixel_height();
  MaskedImage out{Image(w, hgt), ValidityMask(w, hgt, false)};
  for (int r = 0; r < hgt; ++r) {
    for (int c = 0; c < w; ++c) {
      Point2 s;
      try {
        s = apply_homography(inv, {canvas.x0 + c, canvas.y0 + r});
      } catch (const StitchError&) {
        continue;
      }
      s = {snap(s.x), snap(s.y)};
      if (s.x < 0.0 || s.y < 0.0 || s.x > src.width() - 1 || s.y > src.height() - 1) continue;
      const int ix = static_cast<int>(std::floor(s.x));
      const int iy = static_cast<int>(std::floor(s.y));
      const double fx = s.x - ix;
      const double fy = s.y - iy;
      auto px = [&](int x, int y) {
        return src.at(std::min(x, src.width() - 1), std::min(y, src.height() - 1));
      };
      out.image.at(c, r) = (1 - fx) * (1 - fy) * px(ix, iy) + fx * (1 - fy) * px(ix + 1, iy) +
                           (1 - fx) * fy * px(ix, iy + 1) + fx * fy * px(ix + 1, iy + 1);
      out.valid.set(c, r, true);
    }
  }
  return out;
}

}  // namespace reference

}  // namespace xstitch
