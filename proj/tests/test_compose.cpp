#include <cmath>
#include <random>

#include "doctest.h"
#include "xstitch/compose.hpp"
#include "xstitch/error.hpp"
#include "xstitch/metrics.hpp"
#include "xstitch/synth.hpp"
#include "xstitch/warp.hpp"

using namespace xstitch;

namespace {

MaskedImage random_masked(std::mt19937& rng, int w, int h, double p_valid) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MaskedImage m{Image(w, h), ValidityMask(w, h, false)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      m.image.at(x, y) = u(rng);
      m.valid.set(x, y, u(rng) < p_valid);
    }
  }
  return m;
}

}  // namespace

TEST_SUITE("compose") {

TEST_CASE("sigmoid is one half at zero and symmetric") {
  CHECK(sigmoid(0.0) == 0.5);
  for (double x : {0.3, 1.0, 4.0}) CHECK(sigmoid(x) + sigmoid(-x) == doctest::Approx(1.0));
  CHECK(sigmoid(2.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("blend weight saturates beyond the band") {
  const BlendConfig cfg{0.5, 6.0};
  CHECK(blend_weight(0.0, cfg) == 0.5);
  CHECK(blend_weight(6.0, cfg) == doctest::Approx(sigmoid(3.0)));
  CHECK(blend_weight(6.01, cfg) == 1.0);
  CHECK(blend_weight(-6.01, cfg) == 0.0);
  CHECK_THROWS_AS((BlendConfig{0.0, 1.0}.validate()), StitchError);
  CHECK_THROWS_AS((BlendConfig{1.0, 0.0}.validate()), StitchError);
}

TEST_CASE("blended pixels are convex combinations with weight one half on the seam") {
  std::mt19937 rng(21);
  const BlendConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 5 + static_cast<int>(rng() % 20), h = 5 + static_cast<int>(rng() % 20);
    const auto a = random_masked(rng, w, h, 0.8);
    const auto b = random_masked(rng, w, h, 0.8);
    const bool across = trial % 2 == 1;
    SeamPath seam;
    seam.direction = across ? SeamDirection::kLeftToRight : SeamDirection::kTopToBottom;
    const int steps = across ? w : h, span = across ? h : w;
    for (int s = 0; s < steps; ++s) seam.coords.push_back(static_cast<int>(rng() % static_cast<unsigned>(span)));
    const auto out = blend_pair(a, b, seam, cfg, trial % 3 != 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool va = a.valid.at(x, y), vb = b.valid.at(x, y);
        REQUIRE(out.valid.at(x, y) == (va || vb));
        const double v = out.image.at(x, y);
        if (va && vb) {
          const double pa = a.image.at(x, y), pb = b.image.at(x, y);
          REQUIRE(v >= std::min(pa, pb));
          REQUIRE(v <= std::max(pa, pb));
          const int pos = across ? y : x;
          const int s = seam.coords[static_cast<std::size_t>(across ? x : y)];
          if (pos == s) REQUIRE(std::abs(v - 0.5 * (pa + pb)) <= 1e-9);
        } else if (va) {
          REQUIRE(v == a.image.at(x, y));
        } else if (vb) {
          REQUIRE(v == b.image.at(x, y));
        }
      }
    }
  }
}

TEST_CASE("blend rejects mismatched inputs") {
  std::mt19937 rng(1);
  const auto a = random_masked(rng, 6, 6, 1.0);
  const auto b = random_masked(rng, 6, 7, 1.0);
  SeamPath seam;
  seam.coords.assign(6, 0);
  CHECK_THROWS_AS(blend_pair(a, b, seam, {}), StitchError);
  seam.coords.assign(5, 0);
  CHECK_THROWS_AS(blend_pair(a, a, seam, {}), StitchError);
}

TEST_CASE("warp agrees with its serial reference and shifts by whole pixels exactly") {
  std::mt19937 rng(8);
  const Image src = random_masked(rng, 31, 27, 1.0).image;
  const auto h = Homography::from_rows({1.01, 0.02, 2.5, -0.01, 0.99, 1.5, 1e-4, 0, 1});
  const BoundingBox box{-3, -2, 35, 30};
  const auto par = warp_image(src, h, box);
  const auto ser = reference::warp_image(src, h, box);
  for (std::size_t i = 0; i < par.image.size(); ++i) {
    REQUIRE(par.image.pixels()[i] == doctest::Approx(ser.image.pixels()[i]).epsilon(1e-12));
  }
  CHECK(par.valid.flags == ser.valid.flags);

  const auto shifted = warp_image(src, Homography::translation(2, 1), BoundingBox{0, 0, 33, 28});
  CHECK(shifted.image.at(2, 1) == src.at(0, 0));
  CHECK(shifted.image.at(32, 27) == src.at(30, 26));
  CHECK_FALSE(shifted.valid.at(1, 1));
}

TEST_CASE("canvas covers every warped image") {
  StitchPlan plan;
  plan.chained = {Homography::identity(), Homography::translation(-4.5, 90)};
  const Canvas c = compute_canvas(plan, {{100, 100}, {100, 100}});
  CHECK(c.bbox.x0 == -5.0);
  CHECK(c.bbox.y0 == 0.0);
  CHECK(c.bbox.x1 == 100.0);
  CHECK(c.bbox.y1 == 190.0);
}

TEST_CASE("two noiseless slices stitch back to the ground truth") {
  SynthSpec spec;
  spec.resolution = 256;
  spec.n_slices = 2;
  spec.seed = 4;
  const auto gt = generate(spec);
  const auto res = stitch_all(gt.slices, gt.masks);
  CHECK(res.report.order.size() == 2);
  CHECK(res.report.pairs.size() == 1);
  const auto view = ground_truth_view(gt.panorama, gt.panorama_origin,
                                      gt.true_h[static_cast<std::size_t>(res.report.reference)],
                                      res.report.canvas.bbox);
  const auto m = compare_valid(res.panorama, view);
  CHECK(m.ssim > 0.999);
  CHECK(m.psnr > 50.0);
}

TEST_CASE("pipeline input errors") {
  SynthSpec spec;
  spec.resolution = 256;
  spec.n_slices = 3;
  spec.overlap_fraction = 0.3;
  const auto gt = generate(spec);
  CHECK_THROWS_AS(stitch_all({gt.slices[0]}, {gt.masks[0]}), StitchError);
  CHECK_THROWS_AS(stitch_all(gt.slices, {gt.masks[0]}), StitchError);

  // The first and last slices of a three-slice chain at 30% overlap share nothing.
  const auto top = static_cast<std::size_t>(gt.true_order.front());
  const auto bottom = static_cast<std::size_t>(gt.true_order.back());
  try {
    stitch_all({gt.slices[top], gt.slices[bottom]}, {gt.masks[top], gt.masks[bottom]});
    FAIL("expected a throw");
  } catch (const StitchError& e) {
    CHECK(e.kind() == ErrorKind::kEmptyOverlap);
    CHECK(e.pair().has_value());
  }
}

TEST_CASE("pipeline config validation") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.registration.tol_energy = 0;
  CHECK_THROWS_AS(cfg.validate(), StitchError);
  cfg = {};
  cfg.weights = {0, 0, 0};
  CHECK_THROWS_AS(cfg.validate(), StitchError);
  cfg = {};
  cfg.registration.max_corner_sigma = -1;
  CHECK_THROWS_AS(cfg.validate(), StitchError);
}

}
