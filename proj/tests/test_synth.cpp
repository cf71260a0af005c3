#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "xstitch/error.hpp"
#include "xstitch/masks.hpp"
#include "xstitch/synth.hpp"

using namespace xstitch;

namespace {

// Reference SplitMix64 and xoshiro256** as published by Vigna.
struct OracleRng {
  std::uint64_t s[4];
  explicit OracleRng(std::uint64_t seed) {
    for (auto& v : s) {
      seed += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      v = z ^ (z >> 31);
    }
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next() {
    const std::uint64_t r = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return r;
  }
};

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("generator stream is SplitMix64-seeded xoshiro256**") {
  // SplitMix64 from state 0 yields 0xe220a8397b1dcdaf first.
  CHECK(OracleRng(0).s[0] == 0xe220a8397b1dcdafULL);
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
    SynthRng rng(seed);
    OracleRng want(seed);
    for (int i = 0; i < 100; ++i) REQUIRE(rng.next() == want.next());
  }
  SynthRng a(5);
  OracleRng b(5);
  CHECK(a.uniform() == static_cast<double>(b.next() >> 11) / 9007199254740992.0);
}

TEST_CASE("generation is deterministic for a fixed seed") {
  SynthSpec spec;
  spec.resolution = 128;
  spec.warp_kind = ModelKind::kProjective;
  spec.noise_sigma = 0.02;
  spec.seed = 77;
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a.panorama == b.panorama);
  CHECK(a.true_order == b.true_order);
  for (std::size_t i = 0; i < a.slices.size(); ++i) {
    CHECK(a.slices[i] == b.slices[i]);
    CHECK(a.masks[i] == b.masks[i]);
    CHECK(max_entry_difference(a.true_h[i], b.true_h[i]) == 0.0);
  }
  spec.seed = 78;
  CHECK_FALSE(generate(spec).panorama == a.panorama);
}

TEST_CASE("noiseless translation slices are panorama crops") {
  SynthSpec spec;
  spec.resolution = 128;
  spec.seed = 3;
  const auto gt = generate(spec);
  for (std::size_t i = 0; i < gt.slices.size(); ++i) {
    const Point2 o = apply_homography(gt.true_h[i], {0, 0}) - gt.panorama_origin;
    REQUIRE(o.x == std::round(o.x));
    REQUIRE(o.y == std::round(o.y));
    const int ox = static_cast<int>(o.x), oy = static_cast<int>(o.y);
    const Image& s = gt.slices[i];
    for (int y = 0; y < s.height(); ++y) {
      for (int x = 0; x < s.width(); ++x) REQUIRE(s.at(x, y) == gt.panorama.at(x + ox, y + oy));
    }
  }
}

TEST_CASE("true order lists slices from the top and the top slice is the identity") {
  SynthSpec spec;
  spec.resolution = 128;
  spec.n_slices = 6;
  spec.seed = 9;
  const auto gt = generate(spec);
  double last = -1e9;
  for (int idx : gt.true_order) {
    const double y = apply_homography(gt.true_h[static_cast<std::size_t>(idx)], {64, 64}).y;
    CHECK(y > last);
    last = y;
  }
  CHECK(max_entry_difference(gt.true_h[static_cast<std::size_t>(gt.true_order.front())],
                             Homography::identity()) < 1e-15);
}

TEST_CASE("every mask holds the requested screws with centroids on the blob centres") {
  for (auto kind : {ModelKind::kTranslation, ModelKind::kProjective}) {
    SynthSpec spec;
    spec.resolution = 512;
    spec.n_screws_per_slice = 6;
    spec.warp_kind = kind;
    spec.seed = 12;
    const auto gt = generate(spec);
    for (std::size_t i = 0; i < gt.masks.size(); ++i) {
      REQUIRE(gt.masks[i].label_count() == 6);
      REQUIRE(drop_border_instances(gt.masks[i]).label_count() == 6);
      const auto c = extract_centroids(gt.masks[i]);
      for (std::size_t k = 0; k < c.points.size(); ++k) {
        CHECK(std::sqrt(squared_distance(c.points[k], gt.screw_centres[i][k])) < 0.5);
      }
    }
  }
}

TEST_CASE("infeasible specs are rejected") {
  auto bad = [](auto edit) {
    SynthSpec s;
    edit(s);
    try {
      generate(s);
    } catch (const StitchError& e) {
      return e.kind() == ErrorKind::kInfeasibleSpec;
    }
    return false;
  };
  CHECK(bad([](SynthSpec& s) { s.overlap_fraction = 0.1; }));
  CHECK(bad([](SynthSpec& s) { s.overlap_fraction = 0.95; }));
  CHECK(bad([](SynthSpec& s) { s.n_screws_per_slice = 5; }));
  CHECK(bad([](SynthSpec& s) { s.resolution = 32; }));
  CHECK(bad([](SynthSpec& s) { s.warp_magnitude = 1.5; }));
  CHECK(bad([](SynthSpec& s) { s.noise_sigma = -0.1; }));
}

TEST_CASE("ground truth view in the top slice frame reproduces that slice") {
  SynthSpec spec;
  spec.resolution = 128;
  spec.warp_kind = ModelKind::kAffine;
  spec.seed = 21;
  const auto gt = generate(spec);
  const auto top = static_cast<std::size_t>(gt.true_order.front());
  const auto view = ground_truth_view(gt.panorama, gt.panorama_origin, gt.true_h[top],
                                      BoundingBox::of_extent(128, 128));
  double worst = 0.0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (view.valid.at(x, y)) worst = std::max(worst, std::abs(view.image.at(x, y) - gt.slices[top].at(x, y)));
    }
  }
  CHECK(view.valid.count() > 120u * 120u);
  CHECK(worst < 1e-12);
}

}
