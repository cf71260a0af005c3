#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace xstitch {

/// Single-channel raster, row-major, intensities normalized to [0,1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  double at(int x, int y) const { return data_[index(x, y)]; }
  double& at(int x, int y) { return data_[index(x, y)]; }

  std::span<const double> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<double> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  std::span<const double> pixels() const noexcept { return data_; }
  std::span<double> pixels() noexcept { return data_; }

  bool same_extent(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Clamps every value into [0,1]; non-finite values become 0.
  void clamp_unit();

  /// Copy of the rectangle [x, x+w) x [y, y+h); must lie inside the image.
  Image crop(int x, int y, int w, int h) const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2, Point2) = default;
};

double squared_distance(Point2 a, Point2 b);

/// Axis-aligned region of a frame. Pixel (c, r) of a raster covering the box
/// sits at frame coordinate (x0 + c, y0 + r); the raster is
/// ceil(x1 - x0) wide and ceil(y1 - y0) tall.
struct BoundingBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  static BoundingBox of_extent(int width, int height) {
    return {0.0, 0.0, static_cast<double>(width), static_cast<double>(height)};
  }

  int pixel_width() const;
  int pixel_height() const;
  bool degenerate() const { return pixel_width() <= 0 || pixel_height() <= 0; }
  bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }

  /// Smallest box with integer corners containing this one.
  BoundingBox snapped_outward() const;
  void expand_to(Point2 p);

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Per-pixel validity flags aligned with an Image.
struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> flags;

  ValidityMask() = default;
  ValidityMask(int w, int h, bool value)
      : width(w), height(h), flags(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}

  bool at(int x, int y) const { return flags[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { flags[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
};

/// An image together with the pixels that carry data.
struct MaskedImage {
  Image image;
  ValidityMask valid;

  static MaskedImage fully_valid(Image img) {
    ValidityMask v(img.width(), img.height(), true);
    return {std::move(img), std::move(v)};
  }
};

}  // namespace xstitch
