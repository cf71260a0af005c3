#include "xstitch/seam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xstitch/error.hpp"

namespace xstitch {

namespace {

void require_same_extent(const Image& a, const Image& b) {
  if (!a.same_extent(b)) {
    fail(ErrorKind::kExtentMismatch, "energy inputs differ in extent: " +
                                         std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                         " vs " + std::to_string(b.width()) + "x" +
                                         std::to_string(b.height()));
  }
}

// gx^2 + gy^2 per pixel.
std::vector<double> gradient_square_sum(const Image& img) {
  const int w = img.width();
  const int h = img.height();
  std::vector<double> out(img.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
      const double gx = xr > xl ? (img.at(xr, y) - img.at(xl, y)) / (xr - xl) : 0.0;
      const double gy = yd > yu ? (img.at(x, yd) - img.at(x, yu)) / (yd - yu) : 0.0;
      out[static_cast<std::size_t>(y) * w + x] = gx * gx + gy * gy;
    }
  }
  return out;
}

EnergyMap weighted_sum(const SeamWeights& w, const EnergyMap& color, const EnergyMap& grad,
                       const EnergyMap* feat) {
  EnergyMap out(color.width, color.height);
  const auto n = static_cast<std::ptrdiff_t>(out.values.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double v = w.lambda_color * color.values[k] + w.lambda_grad * grad.values[k];
    if (feat) v += w.lambda_feat * feat->values[k];
    out.values[k] = v;
  }
  return out;
}

}  // namespace

EnergyMap EnergyMap::transposed() const {
  EnergyMap t(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) t.at(y, x) = at(x, y);
  }
  return t;
}

void SeamWeights::validate() const {
  if (!(lambda_color >= 0.0 && lambda_grad >= 0.0 && lambda_feat >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "seam weights must be non-negative");
  }
  if (lambda_color + lambda_grad + lambda_feat <= 0.0) {
    fail(ErrorKind::kInvalidArgument, "at least one seam weight must be positive");
  }
}

EnergyMap color_energy(const Image& a, const Image& b) {
  require_same_extent(a, b);
  EnergyMap e(a.width(), a.height());
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  const auto n = static_cast<std::ptrdiff_t>(pa.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double d = pa[k] - pb[k];
    e.values[k] = d * d;
  }
  return e;
}

EnergyMap gradient_energy(const Image& a, const Image& b) {
  require_same_extent(a, b);
  const auto da = gradient_square_sum(a);
  const auto db = gradient_square_sum(b);
  EnergyMap e(a.width(), a.height());
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    e.values[i] = d * d;
  }
  return e;
}

EnergyMap feature_energy(const FeatureMap& fa_in, const FeatureMap& fb_in, int width, int height) {
  if (fa_in.channels != fb_in.channels) {
    fail(ErrorKind::kFeatureMapMismatch, "feature maps have different channel counts");
  }
  const FeatureMap fa = fa_in.resampled_to(width, height);
  const FeatureMap fb = fb_in.resampled_to(width, height);
  EnergyMap e(width, height);
  const int ch = fa.channels;
  const auto n = static_cast<std::ptrdiff_t>(e.values.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double sum = 0.0;
    for (int c = 0; c < ch; ++c) {
      const double d = static_cast<double>(fa.values[k * ch + c]) - fb.values[k * ch + c];
      sum += d * d;
    }
    e.values[k] = sum;
  }
  return e;
}

EnergyMap feature_energy(const Image& a, const Image& b, const FeatureExtractor& extractor) {
  require_same_extent(a, b);
  return feature_energy(extractor.extract(a), extractor.extract(b), a.width(), a.height());
}

EnergyMap hybrid_energy(const Image& a, const Image& b, const SeamWeights& w,
                        const FeatureExtractor& extractor) {
  w.validate();
  const EnergyMap color = color_energy(a, b);
  const EnergyMap grad = gradient_energy(a, b);
  if (w.lambda_feat == 0.0) return weighted_sum(w, color, grad, nullptr);
  const EnergyMap feat = feature_energy(a, b, extractor);
  return weighted_sum(w, color, grad, &feat);
}

EnergyMap hybrid_energy(const Image& a, const Image& b, const SeamWeights& w, const FeatureMap& fa,
                        const FeatureMap& fb) {
  w.validate();
  const EnergyMap color = color_energy(a, b);
  const EnergyMap grad = gradient_energy(a, b);
  if (w.lambda_feat == 0.0) return weighted_sum(w, color, grad, nullptr);
  const EnergyMap feat = feature_energy(fa, fb, a.width(), a.height());
  return weighted_sum(w, color, grad, &feat);
}

SeamPath find_seam(const EnergyMap& e_in, SeamDirection direction) {
  if (direction == SeamDirection::kLeftToRight) {
    SeamPath p = find_seam(e_in.transposed(), SeamDirection::kTopToBottom);
    p.direction = SeamDirection::kLeftToRight;
    return p;
  }
  const EnergyMap& e = e_in;
  if (e.height < 2 || e.width < 1) {
    fail(ErrorKind::kDegenerateExtent, "seam search needs at least two steps along the seam");
  }
  const int w = e.width;
  const int h = e.height;
  std::vector<double> cost(e.values.size());
  std::vector<int> from(e.values.size(), 0);
  for (int c = 0; c < w; ++c) cost[static_cast<std::size_t>(c)] = e.at(c, 0);
  for (int r = 1; r < h; ++r) {
    const std::size_t prev = static_cast<std::size_t>(r - 1) * w;
    const std::size_t cur = static_cast<std::size_t>(r) * w;
    for (int c = 0; c < w; ++c) {
      int best = c;
      double best_cost = cost[prev + c];
      if (c > 0 && cost[prev + c - 1] <= best_cost) {
        best = c - 1;
        best_cost = cost[prev + c - 1];
      }
      if (c + 1 < w && cost[prev + c + 1] < best_cost) {
        best = c + 1;
        best_cost = cost[prev + c + 1];
      }
      cost[cur + c] = e.at(c, r) + best_cost;
      from[cur + c] = best;
    }
  }
  SeamPath path;
  path.direction = SeamDirection::kTopToBottom;
  path.coords.resize(static_cast<std::size_t>(h));
  const std::size_t last = static_cast<std::size_t>(h - 1) * w;
  int c = 0;
  for (int k = 1; k < w; ++k) {
    if (cost[last + k] < cost[last + c]) c = k;
  }
  path.cost = cost[last + c];
  for (int r = h - 1; r >= 0; --r) {
    path.coords[static_cast<std::size_t>(r)] = c;
    c = from[static_cast<std::size_t>(r) * w + c];
  }
  return path;
}

double seam_cost(const EnergyMap& e, const SeamPath& seam) {
  double total = 0.0;
  for (std::size_t k = 0; k < seam.coords.size(); ++k) {
    const int step = static_cast<int>(k);
    total += seam.direction == SeamDirection::kTopToBottom ? e.at(seam.coords[k], step)
                                                           : e.at(step, seam.coords[k]);
  }
  return total;
}

namespace reference {

EnergyMap hybrid_energy(const Image& a, const Image& b, const SeamWeights& w,
                        const FeatureExtractor& extractor) {
  w.validate();
  require_same_extent(a, b);
  const int width = a.width();
  const int height = a.height();
  FeatureMap fa, fb;
  if (w.lambda_feat != 0.0) {
    fa = extractor.extract(a).resampled_to(width, height);
    fb = extractor.extract(b).resampled_to(width, height);
  }
  auto grad2 = [&](const Image& img, int x, int y) {
    const int xl = std::max(x - 1, 0), xr = std::min(x + 1, width - 1);
    const int yu = std::max(y - 1, 0), yd = std::min(y + 1, height - 1);
    const double gx = xr > xl ? (img.at(xr, y) - img.at(xl, y)) / (xr - xl) : 0.0;
    const double gy = yd > yu ? (img.at(x, yd) - img.at(x, yu)) / (yd - yu) : 0.0;
    return gx * gx + gy * gy;
  };
  EnergyMap e(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dc = a.at(x, y) - b.at(x, y);
      const double dg = grad2(a, x, y) - grad2(b, x, y);
      double v = w.lambda_color * (dc * dc) + w.lambda_grad * (dg * dg);
      if (w.lambda_feat != 0.0) {
        double f = 0.0;
        for (int c = 0; c < fa.channels; ++c) {
          const double d = static_cast<double>(fa.at(x, y, c)) - fb.at(x, y, c);
          f += d * d;
        }
        v += w.lambda_feat * f;
      }
      e.at(x, y) = v;
    }
  }
  return e;
}

}  // namespace reference

}  // namespace xstitch
