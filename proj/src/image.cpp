#include "xstitch/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "xstitch/error.hpp"

namespace xstitch {

namespace {
// Coordinates within this distance of an integer are treated as that integer
// when snapping boxes to pixel bounds.
constexpr double kSnap = 1e-6;
}  // namespace

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) fail(ErrorKind::kInvalidArgument, "negative image extent");
  if (!(fill >= 0.0 && fill <= 1.0)) fail(ErrorKind::kInvalidArgument, "fill value outside [0,1]");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) fail(ErrorKind::kInvalidArgument, "negative image extent");
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorKind::kInvalidArgument, "image data length " + std::to_string(data_.size()) +
                                          " does not match " + std::to_string(width) + "x" +
                                          std::to_string(height));
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::kInvalidArgument, "intensity outside [0,1]");
  }
}

void Image::clamp_unit() {
  for (double& v : data_) v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
}

Image Image::crop(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width_ || y + h > height_) {
    fail(ErrorKind::kInvalidArgument, "crop rectangle outside image");
  }
  Image out(w, h);
  for (int r = 0; r < h; ++r) {
    auto src = row(y + r).subspan(static_cast<std::size_t>(x), static_cast<std::size_t>(w));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

double squared_distance(Point2 a, Point2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

int BoundingBox::pixel_width() const {
  return static_cast<int>(std::ceil(x1 - x0 - kSnap));
}

int BoundingBox::pixel_height() const {
  return static_cast<int>(std::ceil(y1 - y0 - kSnap));
}

BoundingBox BoundingBox::snapped_outward() const {
  return {std::floor(x0 + kSnap), std::floor(y0 + kSnap), std::ceil(x1 - kSnap),
          std::ceil(y1 - kSnap)};
}

void BoundingBox::expand_to(Point2 p) {
  x0 = std::min(x0, p.x);
  y0 = std::min(y0, p.y);
  x1 = std::max(x1, p.x);
  y1 = std::max(y1, p.y);
}

std::size_t ValidityMask::count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

}  // namespace xstitch
