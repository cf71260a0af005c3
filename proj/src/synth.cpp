#include "xstitch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "xstitch/error.hpp"
#include "xstitch/warp.hpp"

namespace xstitch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kScrewPeak = 0.95;
// Soft screw edge: full intensity inside 0.85 of the ellipse radius, zero
// beyond 1.15; the mask is the ellipse itself.
constexpr double kCoreRadius = 0.85;
constexpr double kOuterRadius = 1.15;
constexpr double kTextureAmplitude = 0.06;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

struct Band {
  double lo;
  double hi;
};

struct Interval {
  double lo;
  double hi;
  int capacity;
  std::vector<int> windows;  // windows containing the interval
};

// Geometry constants relative to the slice side.
struct Layout {
  double side;
  double semi_major_lo, semi_major_hi;
  double semi_minor_lo, semi_minor_hi;
  double angle_lo, angle_hi;
  double lateral_lo, lateral_hi;
  double y_jitter;
  double half_extent;  // worst-case vertical half-extent of a screw incl. soft edge
  double margin;       // clearance between a screw centre and a slice border, beyond any instance radius
  double pitch;        // minimum vertical distance between screw rows

  explicit Layout(double s) : side(s) {
    semi_major_lo = 0.029 * s;
    semi_major_hi = 0.035 * s;
    semi_minor_lo = 0.013 * s;
    semi_minor_hi = 0.016 * s;
    angle_lo = 15.0 * kPi / 180.0;
    angle_hi = 30.0 * kPi / 180.0;
    lateral_lo = 0.11 * s;
    lateral_hi = 0.25 * s;
    y_jitter = 0.006 * s;
    const double a = semi_major_hi * kOuterRadius;
    const double b = semi_minor_hi * kOuterRadius;
    half_extent = std::sqrt(a * a * std::sin(angle_hi) * std::sin(angle_hi) +
                            b * b * std::cos(angle_hi) * std::cos(angle_hi));
    margin = semi_major_hi * kOuterRadius + y_jitter + 3.0;
    pitch = 2.0 * (half_extent + y_jitter) + 4.0;
  }
};

Homography perturbation(ModelKind kind, double side, double magnitude, SynthRng& rng) {
  const double c = 0.5 * side;
  const Homography to_origin = Homography::translation(-c, -c);
  const Homography back = Homography::translation(c, c);
  switch (kind) {
    case ModelKind::kTranslation:
      return Homography::identity();
    case ModelKind::kSimilarity:
    case ModelKind::kAffine: {
      const double theta = magnitude * rng.uniform(-5.0, 5.0) * kPi / 180.0;
      const double s = 1.0 + magnitude * rng.uniform(-0.03, 0.03);
      double aniso = 0.0, shear = 0.0;
      if (kind == ModelKind::kAffine) {
        aniso = magnitude * rng.uniform(-0.02, 0.02);
        shear = magnitude * rng.uniform(-0.02, 0.02);
      }
      Eigen::Matrix3d rot;
      rot << std::cos(theta), -std::sin(theta), 0, std::sin(theta), std::cos(theta), 0, 0, 0, 1;
      Eigen::Matrix3d lin;
      lin << s * (1 + aniso), shear, 0, 0, s * (1 - aniso), 0, 0, 0, 1;
      return compose(back, compose(Homography(rot * lin), to_origin));
    }
    case ModelKind::kProjective: {
      // Displace each corner by at most 2% of the side at full magnitude.
      const double limit = magnitude * 0.02 * side / std::sqrt(2.0);
      const Point2 corners[] = {{0, 0}, {side, 0}, {side, side}, {0, side}};
      std::vector<PointPair> pairs;
      for (Point2 p : corners) {
        pairs.push_back({p, {p.x + rng.uniform(-limit, limit), p.y + rng.uniform(-limit, limit)}});
      }
      return estimate_transform(pairs, ModelKind::kProjective);
    }
  }
  return Homography::identity();
}

// Vertical band around a slice edge (y = edge_y in slice coordinates) as seen
// in the scene, over the lateral range screws can occupy.
Band edge_band(const Homography& t, double side, double edge_y, double margin) {
  double lo = 1e300, hi = -1e300;
  for (double fx : {0.1, 0.9}) {
    const Point2 q = apply_homography(t, {fx * side, edge_y});
    lo = std::min(lo, q.y);
    hi = std::max(hi, q.y);
  }
  return {lo - margin, hi + margin};
}

// Assigns a number of screw rows to each free interval so that every window
// holds exactly `rows` and each consecutive pair of windows shares at least
// `min_shared` rows. Depth-first with randomized value order.
class RowAssigner {
 public:
  RowAssigner(const std::vector<Interval>& intervals, int windows, int rows, int min_shared,
              SynthRng& rng)
      : iv_(intervals), windows_(windows), rows_(rows), min_shared_(min_shared), rng_(rng),
        counts_(intervals.size(), 0), window_sum_(static_cast<std::size_t>(windows), 0),
        last_(static_cast<std::size_t>(windows), -1), shared_last_(static_cast<std::size_t>(windows), -1) {
    for (std::size_t i = 0; i < iv_.size(); ++i) {
      for (int w : iv_[i].windows) {
        last_[static_cast<std::size_t>(w)] = static_cast<int>(i);
        if (w + 1 < windows_ && contains(i, w + 1)) shared_last_[static_cast<std::size_t>(w)] = static_cast<int>(i);
      }
    }
  }

  bool solve() { return step(0); }
  const std::vector<int>& counts() const { return counts_; }

 private:
  bool contains(std::size_t i, int w) const {
    return std::find(iv_[i].windows.begin(), iv_[i].windows.end(), w) != iv_[i].windows.end();
  }

  bool step(std::size_t i) {
    if (++visits_ > 2'000'000) return false;
    if (i == iv_.size()) return true;
    std::vector<int> values;
    for (int v = 0; v <= iv_[i].capacity; ++v) values.push_back(v);
    for (std::size_t k = values.size(); k > 1; --k) {
      std::swap(values[k - 1], values[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(k) - 1))]);
    }
    for (int v : values) {
      bool ok = true;
      for (int w : iv_[i].windows) {
        if (window_sum_[static_cast<std::size_t>(w)] + v > rows_) ok = false;
      }
      if (!ok) continue;
      counts_[i] = v;
      for (int w : iv_[i].windows) window_sum_[static_cast<std::size_t>(w)] += v;
      if (closes_ok(i) && step(i + 1)) return true;
      for (int w : iv_[i].windows) window_sum_[static_cast<std::size_t>(w)] -= v;
      counts_[i] = 0;
    }
    return false;
  }

  bool closes_ok(std::size_t i) const {
    for (int w = 0; w < windows_; ++w) {
      if (last_[static_cast<std::size_t>(w)] == static_cast<int>(i) &&
          window_sum_[static_cast<std::size_t>(w)] != rows_) {
        return false;
      }
      if (shared_last_[static_cast<std::size_t>(w)] == static_cast<int>(i)) {
        int shared = 0;
        for (std::size_t j = 0; j <= i; ++j) {
          if (contains(j, w) && contains(j, w + 1)) shared += counts_[j];
        }
        if (shared < min_shared_) return false;
      }
    }
    return true;
  }

  const std::vector<Interval>& iv_;
  int windows_;
  int rows_;
  int min_shared_;
  SynthRng& rng_;
  std::vector<int> counts_;
  std::vector<int> window_sum_;
  std::vector<int> last_;
  std::vector<int> shared_last_;
  long visits_ = 0;
};

double smooth_step_down(double rho) {
  if (rho <= kCoreRadius) return 1.0;
  if (rho >= kOuterRadius) return 0.0;
  return 0.5 + 0.5 * std::cos(kPi * (rho - kCoreRadius) / (kOuterRadius - kCoreRadius));
}

double ellipse_radius(const Screw& s, Point2 p) {
  const double dx = p.x - s.centre.x;
  const double dy = p.y - s.centre.y;
  const double c = std::cos(s.angle), sn = std::sin(s.angle);
  const double u = (c * dx + sn * dy) / s.semi_major;
  const double v = (-sn * dx + c * dy) / s.semi_minor;
  return std::sqrt(u * u + v * v);
}

}  // namespace

SynthRng::SynthRng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t SynthRng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double SynthRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SynthRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int SynthRng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(next() % span);
}

double SynthRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

void SynthSpec::validate() const {
  if (resolution < 64) fail(ErrorKind::kInfeasibleSpec, "resolution must be at least 64");
  if (n_slices < 1) fail(ErrorKind::kInfeasibleSpec, "need at least one slice");
  if (!(overlap_fraction >= 0.2 && overlap_fraction <= 0.9)) {
    fail(ErrorKind::kInfeasibleSpec, "overlap_fraction must lie in [0.2, 0.9]");
  }
  if (n_screws_per_slice < 2 || n_screws_per_slice % 2 != 0) {
    fail(ErrorKind::kInfeasibleSpec, "screws come in bilateral pairs: n_screws_per_slice must be even and >= 2");
  }
  if (!(noise_sigma >= 0.0)) fail(ErrorKind::kInfeasibleSpec, "noise_sigma must be >= 0");
  if (!(warp_magnitude >= 0.0 && warp_magnitude <= 1.0)) {
    fail(ErrorKind::kInfeasibleSpec, "warp_magnitude must lie in [0, 1]");
  }
}

double Scene::column_centre(double y) const {
  return 0.5 * width + curve_amplitude * std::sin(2.0 * kPi * y / curve_period + curve_phase);
}

double Scene::screw_reach() const {
  double reach = 0.0;
  for (const auto& s : screws) reach = std::max(reach, s.semi_major * kOuterRadius);
  return reach;
}

double Scene::intensity(Point2 p) const {
  const double w = width;
  double v = 0.35 +
             0.04 * std::sin(2.0 * kPi * p.x / (1.7 * w) + background_phase[0]) *
                 std::cos(2.0 * kPi * p.y / (2.3 * w) + background_phase[1]) +
             0.03 * std::sin(2.0 * kPi * p.y / (3.1 * w) + background_phase[2]);
  const double d = (p.x - column_centre(p.y)) / column_half_width;
  if (std::abs(d) < 1.0) {
    const double column = 0.5 + 0.5 * std::cos(kPi * d);
    const double vert = 0.5 + 0.5 * std::cos(2.0 * kPi * (p.y - vertebra_phase) / vertebra_period);
    v += column * (0.14 + 0.08 * vert);
  }
  for (const auto& t : texture) v += t.amplitude * std::sin(t.kx * p.x + t.ky * p.y + t.phase);

  const double reach = screw_reach();
  auto it = std::lower_bound(screws.begin(), screws.end(), p.y - reach,
                             [](const Screw& s, double y) { return s.centre.y < y; });
  double weight = 0.0;
  for (; it != screws.end() && it->centre.y <= p.y + reach; ++it) {
    weight = std::max(weight, smooth_step_down(ellipse_radius(*it, p)));
  }
  v += (kScrewPeak - v) * weight;
  return std::clamp(v, 0.0, 1.0);
}

int Scene::screw_at(Point2 p) const {
  const double reach = screw_reach();
  auto it = std::lower_bound(screws.begin(), screws.end(), p.y - reach,
                             [](const Screw& s, double y) { return s.centre.y < y; });
  for (; it != screws.end() && it->centre.y <= p.y + reach; ++it) {
    if (ellipse_radius(*it, p) <= 1.0) return static_cast<int>(it - screws.begin()) + 1;
  }
  return 0;
}

GroundTruth generate(const SynthSpec& spec) {
  spec.validate();
  SynthRng rng(spec.seed);
  const int side = spec.resolution;
  const double s = side;
  const int n = spec.n_slices;
  const Layout layout(s);

  GroundTruth gt;
  Scene& scene = gt.scene;
  scene.width = s;
  for (double& ph : scene.background_phase) ph = rng.uniform(0.0, 2.0 * kPi);
  scene.curve_amplitude = rng.uniform(0.03, 0.06) * s;
  scene.curve_period = rng.uniform(2.0, 3.0) * s;
  scene.curve_phase = rng.uniform(0.0, 2.0 * kPi);
  scene.column_half_width = 0.09 * s;
  scene.vertebra_period = rng.uniform(0.14, 0.18) * s;
  scene.vertebra_phase = rng.uniform(0.0, scene.vertebra_period);
  // Trabecular-like texture at a fixed pixel scale.
  for (int i = 0; i < 6; ++i) {
    const double wavelength = rng.uniform(12.0, 24.0);
    const double theta = rng.uniform(0.0, kPi);
    const double k = 2.0 * kPi / wavelength;
    scene.texture.push_back({k * std::cos(theta), k * std::sin(theta), rng.uniform(0.0, 2.0 * kPi), kTextureAmplitude});
  }

  // Slice placement: slice k covers scene rows [offset_k, offset_k + side).
  const double step = (1.0 - spec.overlap_fraction) * s;
  std::vector<Homography> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int offset = static_cast<int>(std::lround(k * step));
    gt.offsets.push_back(offset);
    if (k == 0) {
      t[0] = Homography::identity();
      continue;
    }
    const int dx = rng.uniform_int(-static_cast<int>(0.02 * s), static_cast<int>(0.02 * s));
    t[static_cast<std::size_t>(k)] =
        compose(Homography::translation(dx, offset), perturbation(spec.warp_kind, s, spec.warp_magnitude, rng));
  }

  // Free vertical intervals between slice-edge bands.
  std::vector<Band> bands;
  std::vector<Band> tops, bottoms;
  for (int k = 0; k < n; ++k) {
    tops.push_back(edge_band(t[static_cast<std::size_t>(k)], s, 0.0, layout.margin));
    bottoms.push_back(edge_band(t[static_cast<std::size_t>(k)], s, s, layout.margin));
    bands.push_back(tops.back());
    bands.push_back(bottoms.back());
  }
  std::sort(bands.begin(), bands.end(), [](const Band& a, const Band& b) { return a.lo < b.lo; });
  std::vector<Band> merged;
  for (const Band& b : bands) {
    if (!merged.empty() && b.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, b.hi);
    } else {
      merged.push_back(b);
    }
  }
  std::vector<Interval> intervals;
  for (std::size_t i = 1; i < merged.size(); ++i) {
    Interval iv{merged[i - 1].hi, merged[i].lo, 0, {}};
    const double mid = 0.5 * (iv.lo + iv.hi);
    for (int k = 0; k < n; ++k) {
      if (mid > tops[static_cast<std::size_t>(k)].hi && mid < bottoms[static_cast<std::size_t>(k)].lo) {
        iv.windows.push_back(k);
      }
    }
    if (iv.windows.empty()) continue;
    iv.capacity = 1 + static_cast<int>(std::floor((iv.hi - iv.lo) / layout.pitch));
    intervals.push_back(iv);
  }

  const int rows_per_slice = spec.n_screws_per_slice / 2;
  // Consecutive slices share as many rows as fit, up to half a slice's rows.
  std::vector<int> row_counts;
  for (int min_shared = std::max(rows_per_slice / 2, 1); min_shared >= 1 && row_counts.empty();
       --min_shared) {
    RowAssigner assigner(intervals, n, rows_per_slice, min_shared, rng);
    if (assigner.solve()) row_counts = assigner.counts();
  }
  if (row_counts.empty()) {
    fail(ErrorKind::kInfeasibleSpec,
         "cannot place " + std::to_string(spec.n_screws_per_slice) +
             " fully visible screws per slice at this overlap and resolution");
  }

  // Screw rows: evenly spread inside each interval, then jittered.
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const int count = row_counts[i];
    const Interval& iv = intervals[i];
    std::vector<double> ys;
    if (count == 1) {
      ys.push_back(rng.uniform(iv.lo, iv.hi));
    } else if (count > 1) {
      const double spacing = (iv.hi - iv.lo) / (count - 1);
      const double slack = std::max(0.0, 0.5 * (spacing - layout.pitch));
      for (int r = 0; r < count; ++r) {
        const double y = iv.lo + r * spacing + rng.uniform(-slack, slack);
        ys.push_back(std::clamp(y, iv.lo, iv.hi));
      }
    }
    for (double y : ys) {
      const double cx = scene.column_centre(y);
      for (int side_sign : {-1, 1}) {
        Screw screw;
        const double lateral = rng.uniform(layout.lateral_lo, layout.lateral_hi);
        screw.centre = {cx + side_sign * lateral, y + rng.uniform(-layout.y_jitter, layout.y_jitter)};
        screw.semi_major = rng.uniform(layout.semi_major_lo, layout.semi_major_hi);
        screw.semi_minor = rng.uniform(layout.semi_minor_lo, layout.semi_minor_hi);
        // Long axes tilt toward the midline, like converging pedicle screws.
        screw.angle = -side_sign * rng.uniform(layout.angle_lo, layout.angle_hi);
        scene.screws.push_back(screw);
      }
    }
  }
  std::sort(scene.screws.begin(), scene.screws.end(),
            [](const Screw& a, const Screw& b) { return a.centre.y < b.centre.y; });

  // Ground-truth panorama over the union of slice footprints.
  BoundingBox extent = warped_bounds(t[0], side, side);
  for (const auto& tk : t) {
    const BoundingBox b = warped_bounds(tk, side, side);
    extent.expand_to({b.x0, b.y0});
    extent.expand_to({b.x1, b.y1});
  }
  extent = extent.snapped_outward();
  gt.panorama_origin = {extent.x0, extent.y0};
  {
    const int pw = extent.pixel_width();
    const int ph = extent.pixel_height();
    std::vector<double> px(static_cast<std::size_t>(pw) * ph);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        px[static_cast<std::size_t>(y) * pw + x] = scene.intensity({extent.x0 + x, extent.y0 + y});
      }
    }
    gt.panorama = Image(pw, ph, std::move(px));
  }

  // Slices, masks, and visible screw centres in generation order.
  std::vector<Image> slices;
  std::vector<Mask> masks;
  std::vector<std::vector<Point2>> centres;
  for (int k = 0; k < n; ++k) {
    const Homography& tk = t[static_cast<std::size_t>(k)];
    std::vector<double> px(static_cast<std::size_t>(side) * side);
    std::vector<std::int32_t> raw(px.size(), 0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const Point2 q = apply_homography(tk, {static_cast<double>(x), static_cast<double>(y)});
        px[static_cast<std::size_t>(y) * side + x] = scene.intensity(q);
        raw[static_cast<std::size_t>(y) * side + x] = scene.screw_at(q);
      }
    }
    if (spec.noise_sigma > 0.0) {
      SynthRng noise(spec.seed ^ (0xa0761d6478bd642fULL * static_cast<std::uint64_t>(k + 1)));
      for (double& v : px) v = std::clamp(v + spec.noise_sigma * noise.normal(), 0.0, 1.0);
    }
    // Labels in scan order of first pixel.
    std::vector<std::int32_t> remap(scene.screws.size() + 1, 0);
    std::vector<Point2> visible;
    const Homography inv = invert(tk);
    std::int32_t next = 1;
    for (auto& l : raw) {
      if (l == 0) continue;
      auto& m = remap[static_cast<std::size_t>(l)];
      if (m == 0) {
        m = next++;
        visible.push_back(apply_homography(inv, scene.screws[static_cast<std::size_t>(l - 1)].centre));
      }
      l = m;
    }
    slices.emplace_back(side, side, std::move(px));
    masks.emplace_back(side, side, std::move(raw));
    centres.push_back(std::move(visible));
  }

  // Shuffle; perm[s] is the generation index of shuffled slot s.
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(rng.uniform_int(0, i))]);
  }
  gt.true_order.assign(static_cast<std::size_t>(n), 0);
  for (int slot = 0; slot < n; ++slot) {
    const auto g = static_cast<std::size_t>(perm[static_cast<std::size_t>(slot)]);
    gt.slices.push_back(std::move(slices[g]));
    gt.masks.push_back(std::move(masks[g]));
    gt.screw_centres.push_back(std::move(centres[g]));
    gt.true_h.push_back(t[g]);
    gt.true_order[g] = slot;
  }
  return gt;
}

MaskedImage ground_truth_view(const Image& panorama, Point2 origin, const Homography& reference_h,
                              const BoundingBox& bbox) {
  const Homography to_pixels = compose(Homography::translation(-origin.x, -origin.y), reference_h);
  return warp_image(panorama, invert(to_pixels), bbox);
}

}  // namespace xstitch
