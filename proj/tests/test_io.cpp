#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "xstitch/error.hpp"
#include "xstitch/features.hpp"
#include "xstitch/io.hpp"

using namespace xstitch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("xstitch_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const StitchError& e) {
    return e.kind();
  }
  FAIL("expected a throw");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("config keys, comments and defaults") {
  const auto cfg = parse_config(
      "# weights\n"
      "lambda_color = 2.5\n"
      "lambda_feat=0   # no features\n"
      "\n"
      "allow_projective = false\n"
      "k = 0.25\n"
      "seam_axis = horizontal\n"
      "reference_override = 3\n"
      "max_corner_sigma = 0.5\n");
  CHECK(cfg.weights.lambda_color == 2.5);
  CHECK(cfg.weights.lambda_feat == 0.0);
  CHECK(cfg.weights.lambda_grad == 1.0);
  CHECK_FALSE(cfg.registration.allow_projective);
  CHECK(cfg.blend.k == 0.25);
  CHECK(cfg.seam_axis == StitchAxis::kHorizontal);
  CHECK(cfg.reference_override == 3);
  CHECK(cfg.registration.max_corner_sigma == 0.5);
}

TEST_CASE("config errors") {
  CHECK(kind_of([] { parse_config("lamda_color = 1\n"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { parse_config("lambda_color\n"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { parse_config("max_iters = ten\n"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { parse_config("tol_energy = -1\n"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { parse_config("lambda_color=0\nlambda_grad=0\nlambda_feat=0\n"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { load_config("/nonexistent/xstitch.cfg"); }) == ErrorKind::kIo);
}

TEST_CASE("16-bit image round trip quantizes to 1/65535") {
  TempDir tmp;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(17, 9);
  for (auto& v : img.pixels()) v = u(rng);
  save_image_png(tmp.path / "a.png", img);
  const MaskedImage back = load_image_png(tmp.path / "a.png");
  REQUIRE(back.image.same_extent(img));
  CHECK(back.valid.count() == img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(back.image.pixels()[i] - img.pixels()[i]) <= 0.5 / 65535.0 + 1e-12);
  }
}

TEST_CASE("panorama alpha carries validity") {
  TempDir tmp;
  MaskedImage m{Image(4, 3, 0.25), ValidityMask(4, 3, true)};
  m.valid.set(1, 2, false);
  save_panorama_png(tmp.path / "p.png", m);
  const auto back = load_image_png(tmp.path / "p.png");
  CHECK(back.valid.flags == m.valid.flags);
  CHECK(back.image.at(0, 0) == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("mask pixel values are labels and load compacts them") {
  TempDir tmp;
  const Mask m(3, 2, {0, 1, 2, 3, 0, 1});
  save_mask_png(tmp.path / "m.png", m);
  CHECK(load_mask_png(tmp.path / "m.png") == m);
  // A sparse labelling 0, 7, 300 written as raw values comes back as 0, 1, 2.
  Image raw(3, 1);
  raw.at(1, 0) = 7.0 / 65535.0;
  raw.at(2, 0) = 300.0 / 65535.0;
  save_image_png(tmp.path / "sparse.png", raw);
  const Mask c = load_mask_png(tmp.path / "sparse.png");
  CHECK(c.labels() == std::vector<std::int32_t>{0, 1, 2});
}

TEST_CASE("missing files are I/O errors") {
  CHECK(kind_of([] { load_image_png("/nonexistent/a.png"); }) == ErrorKind::kIo);
  CHECK(kind_of([] { load_mask_png("/nonexistent/m.png"); }) == ErrorKind::kIo);
  CHECK(kind_of([] { read_report("/nonexistent/r.json"); }) == ErrorKind::kIo);
}

TEST_CASE("feature map file layout") {
  TempDir tmp;
  FeatureMap f(3, 2, 2);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = 0.5f * static_cast<float>(i);
  save_feature_map(tmp.path / "f.xsfm", f);

  std::ifstream in(tmp.path / "f.xsfm", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 4 + 16 + 12 * 4);
  CHECK(std::memcmp(bytes.data(), "XSFM", 4) == 0);
  auto u32 = [&](std::size_t off) {
    return bytes[off] | (bytes[off + 1] << 8) | (bytes[off + 2] << 16) | (static_cast<std::uint32_t>(bytes[off + 3]) << 24);
  };
  CHECK(u32(4) == 1u);
  CHECK(u32(8) == 3u);
  CHECK(u32(12) == 2u);
  CHECK(u32(16) == 2u);
  const std::uint32_t bits = u32(20 + 4 * 5);  // value 2.5
  float v;
  std::memcpy(&v, &bits, 4);
  CHECK(v == 2.5f);

  const FeatureMap back = load_feature_map(tmp.path / "f.xsfm");
  CHECK(back.width == 3);
  CHECK(back.channels == 2);
  CHECK(back.values == f.values);

  std::ofstream(tmp.path / "bad.xsfm", std::ios::binary) << "XSFN";
  CHECK_THROWS_AS(load_feature_map(tmp.path / "bad.xsfm"), StitchError);
}

TEST_CASE("report JSON carries order, canvas and timing") {
  TempDir tmp;
  StitchReport r;
  r.order = {2, 0, 1};
  r.reference = 2;
  r.chained = {Homography::identity(), Homography::translation(0, 5), Homography::identity()};
  r.pairs = {{2, 0, 1.5, ModelKind::kAffine, 4, 9}};
  r.canvas.bbox = {-3, 0, 97, 250};
  r.edge_count = 4;
  r.elapsed_ms = 12.5;
  const std::string text = report_to_json(r);
  const auto j = nlohmann::json::parse(text);
  CHECK(j["order"] == nlohmann::json({2, 0, 1}));
  CHECK(j["pairs"][0]["model_kind"] == "affine");
  CHECK(j["canvas"]["width"] == 100);
  CHECK(j["canvas"]["height"] == 250);

  std::ofstream(tmp.path / "r.json") << text;
  const auto s = read_report(tmp.path / "r.json");
  CHECK(s.reference == 2);
  CHECK(s.elapsed_ms == 12.5);
  CHECK(s.canvas == r.canvas.bbox);
}

TEST_CASE("synthetic dataset round trip") {
  TempDir tmp;
  SynthSpec spec;
  spec.resolution = 96;
  spec.n_slices = 3;
  spec.n_screws_per_slice = 4;
  spec.warp_kind = ModelKind::kSimilarity;
  spec.seed = 8;
  const auto gt = generate(spec);
  write_synth_dataset(tmp.path, spec, gt);
  const auto m = read_synth_manifest(tmp.path / "manifest.json");
  CHECK(m.true_order == gt.true_order);
  CHECK(m.panorama_origin == gt.panorama_origin);
  REQUIRE(m.images.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(max_entry_difference(m.true_h[i], gt.true_h[i]) < 1e-12);
    CHECK(load_mask_png(m.masks[i]) == gt.masks[i]);
    CHECK(load_image_png(m.images[i]).image.same_extent(gt.slices[i]));
  }
  CHECK(load_image_png(m.ground_truth).image.same_extent(gt.panorama));
}

}
