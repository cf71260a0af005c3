#include <cmath>
#include <random>

#include "doctest.h"
#include "xstitch/error.hpp"
#include "xstitch/metrics.hpp"

using namespace xstitch;

namespace {

Image random_image(std::mt19937& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h);
  for (auto& v : img.pixels()) v = u(rng);
  return img;
}

// Mean SSIM over all full 11x11 windows, Gaussian sigma 1.5 normalized to sum 1.
double oracle_ssim(const Image& a, const Image& b) {
  double g[11][11], total = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      total += g[i][j];
    }
  }
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double sum = 0.0;
  int count = 0;
  for (int y = 0; y + 11 <= a.height(); ++y) {
    for (int x = 0; x + 11 <= a.width(); ++x) {
      double ma = 0, mb = 0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          ma += g[i][j] / total * a.at(x + j, y + i);
          mb += g[i][j] / total * b.at(x + j, y + i);
        }
      }
      double va = 0, vb = 0, cov = 0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          const double da = a.at(x + j, y + i) - ma, db = b.at(x + j, y + i) - mb;
          va += g[i][j] / total * da * da;
          vb += g[i][j] / total * db * db;
          cov += g[i][j] / total * da * db;
        }
      }
      sum += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return sum / count;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("ssim of an image with itself is exactly one") {
  std::mt19937 rng(1);
  const Image a = random_image(rng, 40, 33);
  CHECK(ssim(a, a) == 1.0);
  CHECK(reference::ssim(a, a) == 1.0);
}

TEST_CASE("psnr of constants 0.1 apart is 20 dB") {
  const Image a(16, 16, 0.5), b(16, 16, 0.6);
  CHECK(std::abs(psnr(a, b) - 20.0) < 1e-9);
  CHECK(std::isinf(psnr(a, a)));
}

TEST_CASE("psnr follows 10 log10 of the inverse mse") {
  Image a(2, 1), b(2, 1);
  a.at(0, 0) = 0.3;  // squared errors 0.09 and 0
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(1.0 / 0.045)));
}

TEST_CASE("ssim matches a direct oracle and the serial reference") {
  std::mt19937 rng(9);
  const Image a = random_image(rng, 24, 19);
  Image b = a;
  std::normal_distribution<double> n(0.0, 0.1);
  for (auto& v : b.pixels()) v = std::clamp(v + n(rng), 0.0, 1.0);
  const double want = oracle_ssim(a, b);
  CHECK(ssim(a, b) == doctest::Approx(want).epsilon(1e-10));
  CHECK(reference::ssim(a, b) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("masked metrics only see valid windows and pixels") {
  std::mt19937 rng(4);
  const Image a = random_image(rng, 30, 30);
  Image b = a;
  ValidityMask valid(30, 30, true);
  for (int y = 0; y < 30; ++y) {
    for (int x = 20; x < 30; ++x) {
      b.at(x, y) = 0.0;
      valid.set(x, y, false);
    }
  }
  CHECK(ssim(a, b, valid) == 1.0);
  CHECK(std::isinf(psnr(a, b, valid)));
  CHECK_THROWS_AS(psnr(a, b, ValidityMask(30, 30, false)), StitchError);
}

TEST_CASE("compare_valid intersects validity and checks extents") {
  std::mt19937 rng(6);
  const Image a = random_image(rng, 20, 20);
  MaskedImage ma = MaskedImage::fully_valid(a);
  MaskedImage mb = MaskedImage::fully_valid(Image(20, 20, 0.0));
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) {
      if (x < 12) {
        mb.image.at(x, y) = a.at(x, y);
      } else {
        mb.valid.set(x, y, false);
      }
    }
  }
  const MetricReport r = compare_valid(ma, mb);
  CHECK(r.ssim == 1.0);
  CHECK(std::isinf(r.psnr));
  try {
    compare_valid(ma, MaskedImage::fully_valid(Image(21, 20)));
    FAIL("expected a throw");
  } catch (const StitchError& e) {
    CHECK(e.kind() == ErrorKind::kExtentMismatch);
  }
}

}
