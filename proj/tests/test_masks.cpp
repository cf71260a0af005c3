#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "xstitch/error.hpp"
#include "xstitch/masks.hpp"

using namespace xstitch;

namespace {

Mask from_rows(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows[0].size());
  std::vector<std::int32_t> v;
  for (const auto& r : rows) {
    for (char c : r) v.push_back(c == '.' ? 0 : c - '0');
  }
  return Mask(w, h, v);
}

// Union-find labelling, numbered by the scan position of each component's
// first pixel.
std::vector<int> oracle_components(const std::vector<int>& bin, int w, int h, int min_area) {
  std::vector<int> parent(bin.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bin[y * w + x]) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || !bin[ny * w + nx]) continue;
          const int a = find(y * w + x), b = find(ny * w + nx);
          if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
      }
    }
  }
  std::map<int, int> area;
  for (int i = 0; i < w * h; ++i) {
    if (bin[i]) ++area[find(i)];
  }
  std::map<int, int> label;
  std::vector<int> out(bin.size(), 0);
  for (int i = 0; i < w * h; ++i) {
    if (!bin[i]) continue;
    const int r = find(i);
    if (area[r] < min_area) continue;
    if (!label.count(r)) label[r] = static_cast<int>(label.size()) + 1;
    out[i] = label[r];
  }
  return out;
}

}  // namespace

TEST_SUITE("masks") {

TEST_CASE("mask rejects gaps and negative labels") {
  CHECK_THROWS_AS(Mask(2, 1, {0, 2}), StitchError);
  CHECK_THROWS_AS(Mask(2, 1, {-1, 0}), StitchError);
  CHECK_THROWS_AS(Mask(2, 2, {0, 1}), StitchError);
  CHECK(Mask(2, 1, {1, 0}).label_count() == 1);
}

TEST_CASE("diagonal neighbours join one component") {
  const Mask bin = from_rows({
      "1...",
      ".1..",
      "...1",
      "..1.",
  });
  const Mask cc = connected_components(bin, 1);
  CHECK(cc.label_count() == 2);
  CHECK(cc.at(0, 0) == 1);
  CHECK(cc.at(1, 1) == 1);
  CHECK(cc.at(3, 2) == 2);
  CHECK(cc.at(2, 3) == 2);
}

TEST_CASE("components below the minimum area are dropped") {
  const Mask bin = from_rows({
      "11..1",
      "11...",
      ".....",
  });
  const Mask cc = connected_components(bin, 2);
  CHECK(cc.label_count() == 1);
  CHECK(cc.at(4, 0) == 0);
}

TEST_CASE("connected components match a union-find oracle") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 12), h = 1 + static_cast<int>(rng() % 12);
    const int min_area = 1 + static_cast<int>(rng() % 3);
    std::vector<int> bin(static_cast<std::size_t>(w * h));
    for (auto& b : bin) b = rng() % 100 < 35 ? 1 : 0;
    const Mask cc = connected_components(Mask(w, h, std::vector<std::int32_t>(bin.begin(), bin.end())), min_area);
    const auto want = oracle_components(bin, w, h, min_area);
    for (int i = 0; i < w * h; ++i) REQUIRE(cc.labels()[static_cast<std::size_t>(i)] == want[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("centroid is the mean pixel coordinate") {
  // label 1 at (0,0), (1,0), (0,1): mean (1/3, 1/3); label 2 at (3,2), (3,3)
  const Mask m = from_rows({
      "11..",
      "1...",
      "...2",
      "...2",
  });
  const CentroidSet c = extract_centroids(m);
  REQUIRE(c.size() == 2);
  CHECK(c.points[0].x == doctest::Approx(1.0 / 3.0));
  CHECK(c.points[0].y == doctest::Approx(1.0 / 3.0));
  CHECK(c.points[1].x == doctest::Approx(3.0));
  CHECK(c.points[1].y == doctest::Approx(2.5));
  CHECK(c.width == 4);
  CHECK(c.height == 4);
}

TEST_CASE("fallback segmentation thresholds inclusively") {
  Image img(4, 1);
  img.at(0, 0) = 0.5;
  img.at(1, 0) = 0.49;
  img.at(3, 0) = 0.9;
  const Mask m = fallback_segment(img, 0.5, 1);
  CHECK(m.label_count() == 2);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(1, 0) == 0);
  CHECK(m.at(3, 0) == 2);
}

TEST_CASE("border instances are removed and the rest relabelled") {
  const Mask m = from_rows({
      "1....",
      "..2..",
      ".....",
      "...3.",
      "....4",
  });
  const Mask d = drop_border_instances(m);
  CHECK(d.label_count() == 2);
  CHECK(d.at(0, 0) == 0);
  CHECK(d.at(2, 1) == 1);
  CHECK(d.at(3, 3) == 2);
  CHECK(d.at(4, 4) == 0);
}

TEST_CASE("default minimum area scales with pixel count") {
  CHECK(default_min_area(512, 512) == 20);
  CHECK(default_min_area(1024, 1024) == 80);
  CHECK(default_min_area(8, 8) == 1);
}

}
