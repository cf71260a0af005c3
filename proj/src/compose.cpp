#include "xstitch/compose.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "xstitch/error.hpp"
#include "xstitch/warp.hpp"

namespace xstitch {

namespace {

// Cost assigned to overlap-rectangle pixels where only one image has data.
constexpr double kInvalidCost = 1e6;

struct PixelRect {
  int x = 0, y = 0, w = 0, h = 0;
  bool empty() const { return w <= 0 || h <= 0; }
};

MaskedImage crop(const MaskedImage& m, const PixelRect& r) {
  MaskedImage out{m.image.crop(r.x, r.y, r.w, r.h), ValidityMask(r.w, r.h, false)};
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) out.valid.set(x, y, m.valid.at(r.x + x, r.y + y));
  }
  return out;
}

void paste(MaskedImage& dst, const MaskedImage& src, int x0, int y0) {
  for (int y = 0; y < src.image.height(); ++y) {
    for (int x = 0; x < src.image.width(); ++x) {
      dst.image.at(x0 + x, y0 + y) = src.image.at(x, y);
      dst.valid.set(x0 + x, y0 + y, src.valid.at(x, y));
    }
  }
}

// Bounding rectangle of pixels valid in both inputs.
PixelRect both_valid_rect(const ValidityMask& a, const ValidityMask& b) {
  int x0 = a.width, y0 = a.height, x1 = -1, y1 = -1;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (a.at(x, y) && b.at(x, y)) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

// Mean cross-axis coordinate of the valid pixels.
double valid_centroid(const ValidityMask& v, StitchAxis axis) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < v.height; ++y) {
    for (int x = 0; x < v.width; ++x) {
      if (!v.at(x, y)) continue;
      sum += axis == StitchAxis::kVertical ? y : x;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

// Bilinear inverse-mapped warp of every channel; validity follows warp_image.
std::pair<FeatureMap, ValidityMask> warp_features(const FeatureMap& f, const Homography& h,
                                                  const BoundingBox& box) {
  const int w = box.pixel_width();
  const int ht = box.pixel_height();
  FeatureMap out(w, ht, f.channels);
  ValidityMask valid(w, ht, false);
  const Homography inv = invert(h);
  for (int r = 0; r < ht; ++r) {
    for (int c = 0; c < w; ++c) {
      const Point2 s = apply_homography(inv, {box.x0 + c, box.y0 + r});
      if (s.x < 0.0 || s.y < 0.0 || s.x > f.width - 1 || s.y > f.height - 1) continue;
      const int x0 = std::min(static_cast<int>(s.x), std::max(f.width - 2, 0));
      const int y0 = std::min(static_cast<int>(s.y), std::max(f.height - 2, 0));
      const int x1 = std::min(x0 + 1, f.width - 1);
      const int y1 = std::min(y0 + 1, f.height - 1);
      const double fx = s.x - x0;
      const double fy = s.y - y0;
      for (int ch = 0; ch < f.channels; ++ch) {
        const double top = (1 - fx) * f.at(x0, y0, ch) + fx * f.at(x1, y0, ch);
        const double bot = (1 - fx) * f.at(x0, y1, ch) + fx * f.at(x1, y1, ch);
        out.at(c, r, ch) = static_cast<float>((1 - fy) * top + fy * bot);
      }
      valid.set(c, r, true);
    }
  }
  return {std::move(out), std::move(valid)};
}

BoundingBox frame_box(const Canvas& canvas, const PixelRect& r) {
  return {canvas.bbox.x0 + r.x, canvas.bbox.y0 + r.y, canvas.bbox.x0 + r.x + r.w,
          canvas.bbox.y0 + r.y + r.h};
}

}  // namespace

void BlendConfig::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorKind::kInvalidArgument, "blend k must be > 0");
  if (!(band > 0.0)) fail(ErrorKind::kInvalidArgument, "blend band must be > 0");
}

void PipelineConfig::validate() const {
  if (!(registration.tol_energy > 0.0)) fail(ErrorKind::kInvalidArgument, "tol_energy must be > 0");
  if (registration.max_iters <= 0) fail(ErrorKind::kInvalidArgument, "max_iters must be > 0");
  if (!(registration.gate_radius_fraction > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "gate_radius_fraction must be > 0");
  }
  if (!(registration.inlier_radius_fraction > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "inlier_radius_fraction must be > 0");
  }
  if (!(registration.max_distortion_fraction > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "max_distortion_fraction must be > 0");
  }
  if (registration.min_inliers < 1) fail(ErrorKind::kInvalidArgument, "min_inliers must be >= 1");
  if (!(registration.centroid_noise > 0.0)) fail(ErrorKind::kInvalidArgument, "centroid_noise must be > 0");
  if (!(registration.max_corner_sigma > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "max_corner_sigma must be > 0");
  }
  weights.validate();
  blend.validate();
}

Canvas compute_canvas(const StitchPlan& plan, const std::vector<std::pair<int, int>>& extents) {
  if (extents.empty() || plan.chained.size() != extents.size()) {
    fail(ErrorKind::kInvalidArgument, "plan and extents disagree on the image count");
  }
  BoundingBox box = warped_bounds(plan.chained[0], extents[0].first, extents[0].second);
  for (std::size_t i = 1; i < extents.size(); ++i) {
    const BoundingBox b = warped_bounds(plan.chained[i], extents[i].first, extents[i].second);
    box.expand_to({b.x0, b.y0});
    box.expand_to({b.x1, b.y1});
  }
  Canvas canvas;
  canvas.bbox = box.snapped_outward();
  canvas.offset = {-canvas.bbox.x0, -canvas.bbox.y0};
  return canvas;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double blend_weight(double d, const BlendConfig& cfg) {
  if (d > cfg.band) return 1.0;
  if (d < -cfg.band) return 0.0;
  return sigmoid(cfg.k * d);
}

MaskedImage blend_pair(const MaskedImage& a, const MaskedImage& b, const SeamPath& seam,
                       const BlendConfig& cfg, bool a_first) {
  cfg.validate();
  const int w = a.image.width();
  const int h = a.image.height();
  if (!a.image.same_extent(b.image) || a.valid.width != w || a.valid.height != h ||
      b.valid.width != w || b.valid.height != h) {
    fail(ErrorKind::kExtentMismatch, "blend inputs differ in extent");
  }
  const bool across = seam.direction == SeamDirection::kLeftToRight;
  const int steps = across ? w : h;
  if (static_cast<int>(seam.coords.size()) != steps) {
    fail(ErrorKind::kExtentMismatch, "seam length does not match the blend extent");
  }

  MaskedImage out{Image(w, h), ValidityMask(w, h, false)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool va = a.valid.at(x, y);
      const bool vb = b.valid.at(x, y);
      if (!va && !vb) continue;
      double v;
      if (va && vb) {
        const int pos = across ? y : x;
        const int s = seam.coords[static_cast<std::size_t>(across ? x : y)];
        const double d = a_first ? s - pos : pos - s;
        const double wa = blend_weight(d, cfg);
        const double pa = a.image.at(x, y);
        const double pb = b.image.at(x, y);
        v = std::clamp(wa * pa + (1.0 - wa) * pb, std::min(pa, pb), std::max(pa, pb));
      } else {
        v = va ? a.image.at(x, y) : b.image.at(x, y);
      }
      out.image.at(x, y) = v;
      out.valid.set(x, y, true);
    }
  }
  return out;
}

StitchResult stitch_all(const std::vector<Image>& images, const std::vector<Mask>& masks,
                        const PipelineConfig& cfg, const std::vector<FeatureMap>& features) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  const int n = static_cast<int>(images.size());
  if (n < 2) fail(ErrorKind::kInvalidArgument, "stitching needs at least two images");
  if (static_cast<int>(masks.size()) != n) {
    fail(ErrorKind::kInvalidArgument, "every image needs a mask");
  }
  const bool file_features = cfg.feature_source == FeatureSource::kFile && cfg.weights.lambda_feat > 0.0;
  if (file_features && static_cast<int>(features.size()) != n) {
    fail(ErrorKind::kFeatureMapMismatch, "feature_source=file needs one feature map per image");
  }

  std::vector<CentroidSet> centroids;
  std::vector<std::pair<int, int>> extents;
  for (int i = 0; i < n; ++i) {
    const Image& img = images[static_cast<std::size_t>(i)];
    const Mask& mask = masks[static_cast<std::size_t>(i)];
    if (img.width() != mask.width() || img.height() != mask.height()) {
      throw StitchError(ErrorKind::kExtentMismatch, "mask extent differs from its image")
          .with_pair(i, i);
    }
    centroids.push_back(extract_centroids(drop_border_instances(mask)));
    extents.emplace_back(img.width(), img.height());
  }

  const PairwiseEnergyMatrix m = build_energy_matrix(centroids, cfg.registration);
  std::vector<int> order;
  try {
    if (cfg.exact_order) {
      order = order_exact(m);
    } else {
      try {
        order = order_greedy(m);
      } catch (const StitchError& e) {
        // A greedy dead end does not rule out a chain through every image.
        if (e.kind() != ErrorKind::kDisconnectedSet || n > kMaxExactImages) throw;
        order = order_exact(m);
      }
    }
  } catch (const StitchError& e) {
    if (e.kind() != ErrorKind::kDisconnectedSet || n != 2) throw;
    // With two images the only possible failure is the pair itself.
    const PairEntry& entry = m.entry(0, 1);
    throw StitchError(entry.failure.value_or(ErrorKind::kEmptyOverlap),
                      entry.message.empty() ? "the pair does not overlap" : entry.message)
        .with_pair(0, 1);
  }
  StitchPlan plan = pick_reference_and_chain(m, order, cfg.reference_override, cfg.seam_axis);
  const Canvas canvas = compute_canvas(plan, extents);

  StitchReport report;
  report.reference = plan.reference;
  report.order = plan.order;
  report.chained = plan.chained;
  report.canvas = canvas;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) report.edge_count += m.has_edge(i, j) ? 1 : 0;
  }
  for (std::size_t k = 1; k < plan.order.size(); ++k) {
    const int a = plan.order[k - 1];
    const int b = plan.order[k];
    const int dst = m.has_edge(a, b) ? a : b;
    const int src = dst == a ? b : a;
    const RegistrationResult& r = *m.entry(dst, src).registration;
    report.pairs.push_back({dst, src, r.energy, r.model_kind, r.iterations, r.matches});
  }

  std::vector<FeatureMap> full_features;
  if (file_features) {
    for (int i = 0; i < n; ++i) {
      full_features.push_back(features[static_cast<std::size_t>(i)].resampled_to(extents[static_cast<std::size_t>(i)].first,
                                                                                   extents[static_cast<std::size_t>(i)].second));
    }
  }

  auto footprint = [&](int i) {
    const auto [w, h] = extents[static_cast<std::size_t>(i)];
    const BoundingBox b = warped_bounds(plan.chained[static_cast<std::size_t>(i)], w, h).snapped_outward();
    PixelRect r{static_cast<int>(b.x0 - canvas.bbox.x0), static_cast<int>(b.y0 - canvas.bbox.y0),
                b.pixel_width(), b.pixel_height()};
    r.x = std::max(r.x, 0);
    r.y = std::max(r.y, 0);
    r.w = std::min(r.w, canvas.width() - r.x);
    r.h = std::min(r.h, canvas.height() - r.y);
    return r;
  };

  MaskedImage pano{Image(canvas.width(), canvas.height()),
                   ValidityMask(canvas.width(), canvas.height(), false)};
  {
    const int ref = plan.reference;
    const PixelRect r = footprint(ref);
    paste(pano, warp_image(images[static_cast<std::size_t>(ref)], plan.chained[static_cast<std::size_t>(ref)],
                           frame_box(canvas, r)),
          r.x, r.y);
  }

  // Fusion walks outward from the reference along the chain.
  const auto ref_pos = static_cast<int>(
      std::find(plan.order.begin(), plan.order.end(), plan.reference) - plan.order.begin());
  std::vector<std::pair<int, int>> steps;  // (image, previous)
  for (int k = ref_pos + 1; k < n; ++k) {
    steps.emplace_back(plan.order[static_cast<std::size_t>(k)], plan.order[static_cast<std::size_t>(k - 1)]);
  }
  for (int k = ref_pos - 1; k >= 0; --k) {
    steps.emplace_back(plan.order[static_cast<std::size_t>(k)], plan.order[static_cast<std::size_t>(k + 1)]);
  }
  std::vector<int> fused{plan.reference};

  const OrientedGradientExtractor extractor;
  const SeamDirection direction =
      cfg.seam_axis == StitchAxis::kVertical ? SeamDirection::kLeftToRight : SeamDirection::kTopToBottom;
  for (const auto& [img_idx, prev] : steps) {
    const PixelRect r = footprint(img_idx);
    const BoundingBox box = frame_box(canvas, r);
    const MaskedImage b =
        warp_image(images[static_cast<std::size_t>(img_idx)], plan.chained[static_cast<std::size_t>(img_idx)], box);
    const MaskedImage a = crop(pano, r);
    const PixelRect o = both_valid_rect(a.valid, b.valid);
    if (o.empty()) {
      throw StitchError(ErrorKind::kEmptyOverlap, "warped image does not overlap the panorama")
          .with_pair(prev, img_idx);
    }
    if ((direction == SeamDirection::kLeftToRight ? o.w : o.h) < 2) {
      throw StitchError(ErrorKind::kDegenerateExtent, "overlap is too thin for a seam")
          .with_pair(prev, img_idx);
    }
    const MaskedImage ao = crop(a, o);
    const MaskedImage bo = crop(b, o);

    EnergyMap e;
    if (file_features) {
      const PixelRect o_canvas{r.x + o.x, r.y + o.y, o.w, o.h};
      const BoundingBox obox = frame_box(canvas, o_canvas);
      FeatureMap fa(o.w, o.h, full_features[0].channels);
      for (int idx : fused) {
        auto [f, v] = warp_features(full_features[static_cast<std::size_t>(idx)],
                                    plan.chained[static_cast<std::size_t>(idx)], obox);
        if (f.channels != fa.channels) {
          fail(ErrorKind::kFeatureMapMismatch, "feature maps differ in channel count");
        }
        for (int y = 0; y < o.h; ++y) {
          for (int x = 0; x < o.w; ++x) {
            if (!v.at(x, y)) continue;
            for (int ch = 0; ch < f.channels; ++ch) fa.at(x, y, ch) = f.at(x, y, ch);
          }
        }
      }
      const FeatureMap fb = warp_features(full_features[static_cast<std::size_t>(img_idx)],
                                          plan.chained[static_cast<std::size_t>(img_idx)], obox)
                                .first;
      if (fb.channels != fa.channels) {
        fail(ErrorKind::kFeatureMapMismatch, "feature maps differ in channel count");
      }
      e = hybrid_energy(ao.image, bo.image, cfg.weights, fa, fb);
    } else {
      e = hybrid_energy(ao.image, bo.image, cfg.weights, extractor);
    }
    for (int y = 0; y < o.h; ++y) {
      for (int x = 0; x < o.w; ++x) {
        if (!ao.valid.at(x, y) || !bo.valid.at(x, y)) e.at(x, y) = kInvalidCost;
      }
    }
    const SeamPath seam = find_seam(e, direction);

    // Extend the seam to the full footprint, holding its end values.
    SeamPath full;
    full.direction = direction;
    full.cost = seam.cost;
    const bool across = direction == SeamDirection::kLeftToRight;
    const int steps_full = across ? r.w : r.h;
    const int start_step = across ? o.x : o.y;
    const int shift = across ? o.y : o.x;
    full.coords.resize(static_cast<std::size_t>(steps_full));
    for (int s = 0; s < steps_full; ++s) {
      const int local = std::clamp(s - start_step, 0, static_cast<int>(seam.coords.size()) - 1);
      full.coords[static_cast<std::size_t>(s)] = seam.coords[static_cast<std::size_t>(local)] + shift;
    }

    const bool a_first = valid_centroid(a.valid, cfg.seam_axis) <= valid_centroid(b.valid, cfg.seam_axis);
    paste(pano, blend_pair(a, b, full, cfg.blend, a_first), r.x, r.y);
    fused.push_back(img_idx);
    report.fusions.push_back({img_idx, prev, seam.cost, static_cast<int>(seam.coords.size())});
  }

  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {std::move(pano), std::move(report)};
}

}  // namespace xstitch
