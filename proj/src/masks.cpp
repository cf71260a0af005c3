#include "xstitch/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "xstitch/error.hpp"

namespace xstitch {

namespace {

// Union-find over provisional labels.
class DisjointSet {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

// Relabels instances in scan order of first occurrence, dropping those whose
// old label maps to `keep[label] == false`.
Mask relabel(const Mask& mask, const std::vector<bool>& keep) {
  std::vector<std::int32_t> remap(static_cast<std::size_t>(mask.label_count()) + 1, -1);
  remap[0] = 0;
  std::int32_t next = 1;
  std::vector<std::int32_t> out(mask.labels().size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int32_t l = mask.labels()[i];
    if (l == 0) continue;
    if (!keep[static_cast<std::size_t>(l)]) continue;
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next++;
    out[i] = remap[static_cast<std::size_t>(l)];
  }
  return Mask(mask.width(), mask.height(), std::move(out));
}

}  // namespace

Mask::Mask(int width, int height)
    : width_(width), height_(height), labels_(static_cast<std::size_t>(width) * height, 0) {
  if (width < 0 || height < 0) fail(ErrorKind::kInvalidArgument, "negative mask extent");
}

Mask::Mask(int width, int height, std::vector<std::int32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width < 0 || height < 0) fail(ErrorKind::kInvalidArgument, "negative mask extent");
  if (labels_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorKind::kInvalidArgument, "mask label count does not match extent");
  }
  std::int32_t max_label = 0;
  for (std::int32_t l : labels_) {
    if (l < 0) fail(ErrorKind::kInvalidArgument, "negative mask label");
    max_label = std::max(max_label, l);
  }
  std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
  for (std::int32_t l : labels_) seen[static_cast<std::size_t>(l)] = true;
  for (std::int32_t l = 1; l <= max_label; ++l) {
    if (!seen[static_cast<std::size_t>(l)]) {
      fail(ErrorKind::kInvalidArgument,
           "mask labels are not contiguous: label " + std::to_string(l) + " missing");
    }
  }
  count_ = max_label;
}

Mask Mask::binarized() const {
  std::vector<std::int32_t> out(labels_.size());
  std::transform(labels_.begin(), labels_.end(), out.begin(),
                 [](std::int32_t l) { return l > 0 ? 1 : 0; });
  return Mask(width_, height_, std::move(out));
}

Point2 CentroidSet::mean() const {
  Point2 sum;
  for (Point2 p : points) sum = sum + p;
  return points.empty() ? sum : (1.0 / static_cast<double>(points.size())) * sum;
}

Mask connected_components(const Mask& binary, int min_area) {
  const int w = binary.width();
  const int h = binary.height();
  if (binary.label_count() > 1) {
    fail(ErrorKind::kInvalidArgument, "connected_components expects a {0,1} raster");
  }
  // Two-pass labelling; provisional labels start at 1 (0 is background).
  std::vector<int> prov(static_cast<std::size_t>(w) * h, 0);
  DisjointSet sets;
  sets.make();
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (binary.at(x, y) == 0) continue;
      int label = 0;
      const int nx[] = {x - 1, x - 1, x, x + 1};
      const int ny[] = {y, y - 1, y - 1, y - 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= w || ny[k] < 0) continue;
        const int n = prov[idx(nx[k], ny[k])];
        if (n == 0) continue;
        if (label == 0) {
          label = n;
        } else {
          sets.unite(label, n);
        }
      }
      prov[idx(x, y)] = label == 0 ? sets.make() : label;
    }
  }

  // Resolve roots, count areas, and order components by first pixel.
  std::vector<int> area_by_root;
  std::vector<int> order_by_root;
  std::vector<int> roots(prov.size(), 0);
  for (std::size_t i = 0; i < prov.size(); ++i) {
    if (prov[i] == 0) continue;
    const int r = sets.find(prov[i]);
    roots[i] = r;
    if (static_cast<std::size_t>(r) >= area_by_root.size()) {
      area_by_root.resize(static_cast<std::size_t>(r) + 1, 0);
    }
    ++area_by_root[static_cast<std::size_t>(r)];
  }
  std::vector<std::int32_t> final_label(area_by_root.size(), 0);
  std::vector<bool> assigned(area_by_root.size(), false);
  std::int32_t next = 1;
  std::vector<std::int32_t> out(prov.size(), 0);
  for (std::size_t i = 0; i < prov.size(); ++i) {
    const int r = roots[i];
    if (r == 0) continue;
    const auto ur = static_cast<std::size_t>(r);
    if (area_by_root[ur] < min_area) continue;
    if (!assigned[ur]) {
      assigned[ur] = true;
      final_label[ur] = next++;
    }
    out[i] = final_label[ur];
  }
  return Mask(w, h, std::move(out));
}

CentroidSet extract_centroids(const Mask& mask) {
  const auto k = static_cast<std::size_t>(mask.label_count());
  std::vector<double> sx(k + 1, 0.0), sy(k + 1, 0.0);
  std::vector<long long> n(k + 1, 0);
  std::vector<int> x0(k + 1, mask.width()), y0(k + 1, mask.height()), x1(k + 1, -1), y1(k + 1, -1);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const auto l = static_cast<std::size_t>(mask.at(x, y));
      if (l == 0) continue;
      sx[l] += x;
      sy[l] += y;
      ++n[l];
      x0[l] = std::min(x0[l], x);
      y0[l] = std::min(y0[l], y);
      x1[l] = std::max(x1[l], x);
      y1[l] = std::max(y1[l], y);
    }
  }
  CentroidSet set;
  set.width = mask.width();
  set.height = mask.height();
  for (std::size_t l = 1; l <= k; ++l) {
    const double cnt = static_cast<double>(n[l]);
    set.points.push_back({sx[l] / cnt, sy[l] / cnt});
    const double rx = 0.5 * (x1[l] - x0[l] + 1);
    const double ry = 0.5 * (y1[l] - y0[l] + 1);
    set.max_instance_radius = std::max(set.max_instance_radius, std::hypot(rx, ry));
  }
  return set;
}

Mask fallback_segment(const Image& img, double threshold, int min_area) {
  std::vector<std::int32_t> bin(img.size());
  const auto px = img.pixels();
  std::transform(px.begin(), px.end(), bin.begin(),
                 [threshold](double v) { return v >= threshold ? 1 : 0; });
  return connected_components(Mask(img.width(), img.height(), std::move(bin)), min_area);
}

Mask drop_border_instances(const Mask& mask) {
  std::vector<bool> keep(static_cast<std::size_t>(mask.label_count()) + 1, true);
  const int w = mask.width();
  const int h = mask.height();
  for (int x = 0; x < w; ++x) {
    keep[static_cast<std::size_t>(mask.at(x, 0))] = false;
    keep[static_cast<std::size_t>(mask.at(x, h - 1))] = false;
  }
  for (int y = 0; y < h; ++y) {
    keep[static_cast<std::size_t>(mask.at(0, y))] = false;
    keep[static_cast<std::size_t>(mask.at(w - 1, y))] = false;
  }
  keep[0] = true;
  return relabel(mask, keep);
}

int default_min_area(int width, int height) {
  const double side = std::sqrt(static_cast<double>(width) * height);
  return std::max(1, static_cast<int>(std::lround(20.0 * (side / 512.0) * (side / 512.0))));
}

}  // namespace xstitch
