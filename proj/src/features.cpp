#include "xstitch/features.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "xstitch/error.hpp"

namespace xstitch {

namespace {

constexpr std::array<char, 4> kMagic = {'X', 'S', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                        static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) fail(ErrorKind::kIo, "truncated feature map header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

std::vector<double> gaussian_blur(std::span<const double> plane, int width, int height, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(plane.size()), out(plane.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    const std::size_t base = static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = std::clamp(x + k, 0, width - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * plane[base + xx];
      }
      tmp[base + x] = acc;
    }
  }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = std::clamp(y + k, 0, height - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(yy) * width + x];
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

FeatureMap OrientedGradientExtractor::extract(const Image& img) const {
  const int w = img.width();
  const int h = img.height();
  FeatureMap map(w, h, kOrientations);
  if (img.empty()) return map;
  std::array<double, kOrientations> cs{}, sn{};
  for (int k = 0; k < kOrientations; ++k) {
    const double theta = k * std::numbers::pi / 4.0;
    cs[static_cast<std::size_t>(k)] = std::cos(theta);
    sn[static_cast<std::size_t>(k)] = std::sin(theta);
  }
  std::vector<std::vector<double>> planes(kOrientations,
                                          std::vector<double>(static_cast<std::size_t>(w) * h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
      const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
      const double gx = xr > xl ? (img.at(xr, y) - img.at(xl, y)) / (xr - xl) : 0.0;
      const double gy = yd > yu ? (img.at(x, yd) - img.at(x, yu)) / (yd - yu) : 0.0;
      for (int k = 0; k < kOrientations; ++k) {
        planes[static_cast<std::size_t>(k)][static_cast<std::size_t>(y) * w + x] =
            std::max(0.0, gx * cs[static_cast<std::size_t>(k)] + gy * sn[static_cast<std::size_t>(k)]);
      }
    }
  }
  for (int k = 0; k < kOrientations; ++k) {
    const auto blurred = gaussian_blur(planes[static_cast<std::size_t>(k)], w, h, sigma_);
    for (std::size_t i = 0; i < blurred.size(); ++i) {
      map.values[i * kOrientations + static_cast<std::size_t>(k)] = static_cast<float>(blurred[i]);
    }
  }
  return map;
}

FeatureMap FeatureMap::resampled_to(int w, int h) const {
  if (w == width && h == height) return *this;
  if (width <= 0 || height <= 0) fail(ErrorKind::kFeatureMapMismatch, "empty feature map");
  const int stride = std::max(1, static_cast<int>(std::lround(static_cast<double>(w) / width)));
  if ((w + stride - 1) / stride != width || (h + stride - 1) / stride != height) {
    fail(ErrorKind::kFeatureMapMismatch,
         "feature map " + std::to_string(width) + "x" + std::to_string(height) +
             " does not match image " + std::to_string(w) + "x" + std::to_string(h));
  }
  FeatureMap out(w, h, channels);
  const double half = 0.5 * (stride - 1);
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y - half) / stride, 0.0, static_cast<double>(height - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x - half) / stride, 0.0, static_cast<double>(width - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, width - 1);
      const double tx = fx - x0;
      for (int c = 0; c < channels; ++c) {
        const double top = (1 - tx) * at(x0, y0, c) + tx * at(x1, y0, c);
        const double bottom = (1 - tx) * at(x0, y1, c) + tx * at(x1, y1, c);
        out.at(x, y, c) = static_cast<float>((1 - ty) * top + ty * bottom);
      }
    }
  }
  return out;
}

FeatureMap FeatureMap::crop(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || x + w > width || y + h > height) {
    fail(ErrorKind::kInvalidArgument, "feature crop outside map");
  }
  FeatureMap out(w, h, channels);
  for (int r = 0; r < h; ++r) {
    const auto src = values.begin() + static_cast<std::ptrdiff_t>(
                                          (static_cast<std::size_t>(y + r) * width + x) * channels);
    std::copy(src, src + static_cast<std::ptrdiff_t>(w) * channels,
              out.values.begin() + static_cast<std::ptrdiff_t>(r) * w * channels);
  }
  return out;
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open feature map " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) fail(ErrorKind::kIo, "not a feature map file: " + path.string());
  if (get_u32(in) != kVersion) fail(ErrorKind::kIo, "unsupported feature map version");
  const auto w = get_u32(in);
  const auto h = get_u32(in);
  const auto c = get_u32(in);
  if (w == 0 || h == 0 || c == 0 || w > (1u << 16) || h > (1u << 16) || c > 4096) {
    fail(ErrorKind::kIo, "implausible feature map header");
  }
  FeatureMap map(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  for (float& v : map.values) {
    const std::uint32_t bits = get_u32(in);
    v = std::bit_cast<float>(bits);
  }
  return map;
}

void save_feature_map(const std::filesystem::path& path, const FeatureMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write feature map " + path.string());
  out.write(kMagic.data(), 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(map.width));
  put_u32(out, static_cast<std::uint32_t>(map.height));
  put_u32(out, static_cast<std::uint32_t>(map.channels));
  for (float v : map.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (!out) fail(ErrorKind::kIo, "failed writing feature map " + path.string());
}

}  // namespace xstitch
