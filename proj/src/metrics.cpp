#include "xstitch/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "xstitch/error.hpp"

namespace xstitch {

namespace {

constexpr int kRadius = kSsimWindow / 2;
constexpr double kC1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
constexpr double kC2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);

std::array<double, kSsimWindow> window_1d() {
  std::array<double, kSsimWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kRadius;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= sum;
  return w;
}

void check_extents(const Image& a, const Image& b) {
  if (!a.same_extent(b)) fail(ErrorKind::kExtentMismatch, "metric inputs differ in extent");
}

double local_ssim(double ma, double mb, double saa, double sbb, double sab) {
  const double va = saa - ma * ma;
  const double vb = sbb - mb * mb;
  const double cov = sab - ma * mb;
  return ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
         ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
}

// Window-level statistics over valid windows, with an optional mask. Rows
// are reduced independently and summed in order, so the result does not
// depend on the thread count.
double ssim_impl(const Image& a, const Image& b, const ValidityMask* valid) {
  check_extents(a, b);
  const int w = a.width();
  const int h = a.height();
  if (w < kSsimWindow || h < kSsimWindow) {
    fail(ErrorKind::kTooSmall, "SSIM needs at least 11x11 pixels");
  }
  const auto win = window_1d();
  const int ow = w - 2 * kRadius;
  const int oh = h - 2 * kRadius;

  // Horizontal pass: five statistics per pixel of the valid-width band.
  std::vector<std::array<double, 5>> horiz(static_cast<std::size_t>(ow) * h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto ra = a.row(y);
    const auto rb = b.row(y);
    for (int x = 0; x < ow; ++x) {
      std::array<double, 5> s{};
      for (int k = 0; k < kSsimWindow; ++k) {
        const double wk = win[static_cast<std::size_t>(k)];
        const double va = ra[static_cast<std::size_t>(x + k)];
        const double vb = rb[static_cast<std::size_t>(x + k)];
        s[0] += wk * va;
        s[1] += wk * vb;
        s[2] += wk * (va * va);
        s[3] += wk * (vb * vb);
        s[4] += wk * (va * vb);
      }
      horiz[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }

  // Invalid-pixel prefix counts for window rejection.
  std::vector<int> bad;
  if (valid) {
    bad.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        bad[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] =
            (valid->at(x, y) ? 0 : 1) + bad[static_cast<std::size_t>(y) * (w + 1) + x + 1] +
            bad[static_cast<std::size_t>(y + 1) * (w + 1) + x] -
            bad[static_cast<std::size_t>(y) * (w + 1) + x];
      }
    }
  }
  auto window_ok = [&](int x, int y) {
    if (!valid) return true;
    const auto W = static_cast<std::size_t>(w + 1);
    const std::size_t x0 = static_cast<std::size_t>(x), y0 = static_cast<std::size_t>(y);
    const std::size_t x1 = x0 + kSsimWindow, y1 = y0 + kSsimWindow;
    return bad[y1 * W + x1] - bad[y0 * W + x1] - bad[y1 * W + x0] + bad[y0 * W + x0] == 0;
  };

  std::vector<double> row_sum(static_cast<std::size_t>(oh), 0.0);
  std::vector<long long> row_count(static_cast<std::size_t>(oh), 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < oh; ++y) {
    double acc = 0.0;
    long long cnt = 0;
    for (int x = 0; x < ow; ++x) {
      if (!window_ok(x, y)) continue;
      std::array<double, 5> s{};
      for (int k = 0; k < kSsimWindow; ++k) {
        const double wk = win[static_cast<std::size_t>(k)];
        const auto& hv = horiz[static_cast<std::size_t>(y + k) * ow + x];
        for (int q = 0; q < 5; ++q) s[static_cast<std::size_t>(q)] += wk * hv[static_cast<std::size_t>(q)];
      }
      acc += local_ssim(s[0], s[1], s[2], s[3], s[4]);
      ++cnt;
    }
    row_sum[static_cast<std::size_t>(y)] = acc;
    row_count[static_cast<std::size_t>(y)] = cnt;
  }
  double total = 0.0;
  long long count = 0;
  for (int y = 0; y < oh; ++y) {
    total += row_sum[static_cast<std::size_t>(y)];
    count += row_count[static_cast<std::size_t>(y)];
  }
  if (count == 0) fail(ErrorKind::kTooSmall, "no fully valid 11x11 window");
  return total / static_cast<double>(count);
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_extents(a, b);
  if (a.empty()) fail(ErrorKind::kTooSmall, "PSNR of empty images");
  double sse = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(pa.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double psnr(const Image& a, const Image& b, const ValidityMask& valid) {
  check_extents(a, b);
  double sse = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!valid.at(x, y)) continue;
      const double d = a.at(x, y) - b.at(x, y);
      sse += d * d;
      ++n;
    }
  }
  if (n == 0) fail(ErrorKind::kTooSmall, "no valid pixels for PSNR");
  const double mse = sse / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, nullptr); }

double ssim(const Image& a, const Image& b, const ValidityMask& valid) {
  return ssim_impl(a, b, &valid);
}

MetricReport compare_valid(const MaskedImage& a, const MaskedImage& b) {
  if (!a.image.same_extent(b.image)) fail(ErrorKind::kExtentMismatch, "compared images differ in extent");
  ValidityMask both(a.image.width(), a.image.height(), false);
  for (int y = 0; y < a.image.height(); ++y) {
    for (int x = 0; x < a.image.width(); ++x) both.set(x, y, a.valid.at(x, y) && b.valid.at(x, y));
  }
  MetricReport r;
  r.ssim = ssim(a.image, b.image, both);
  r.psnr = psnr(a.image, b.image, both);
  return r;
}

namespace reference {

double ssim(const Image& a, const Image& b) {
  check_extents(a, b);
  const int w = a.width();
  const int h = a.height();
  if (w < kSsimWindow || h < kSsimWindow) {
    fail(ErrorKind::kTooSmall, "SSIM needs at least 11x11 pixels");
  }
  const auto win = window_1d();
  double total = 0.0;
  long long count = 0;
  for (int y = 0; y + kSsimWindow <= h; ++y) {
    for (int x = 0; x + kSsimWindow <= w; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int j = 0; j < kSsimWindow; ++j) {
        for (int i = 0; i < kSsimWindow; ++i) {
          const double wt = win[static_cast<std::size_t>(i)] * win[static_cast<std::size_t>(j)];
          const double va = a.at(x + i, y + j);
          const double vb = b.at(x + i, y + j);
          ma += wt * va;
          mb += wt * vb;
          saa += wt * va * va;
          sbb += wt * vb * vb;
          sab += wt * va * vb;
        }
      }
      total += local_ssim(ma, mb, saa, sbb, sab);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace reference

}  // namespace xstitch
