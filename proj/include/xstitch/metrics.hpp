#pragma once

#include "xstitch/image.hpp"

namespace xstitch {

struct MetricReport {
  double ssim = 0.0;
  double psnr = 0.0;  // +inf for identical inputs
  double elapsed_ms = 0.0;
};

/// 10 log10(1 / MSE) on the unit intensity scale; +inf when MSE is 0.
double psnr(const Image& a, const Image& b);
/// PSNR over the pixels flagged in `valid`. Throws kTooSmall when none are.
double psnr(const Image& a, const Image& b, const ValidityMask& valid);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean local SSIM over every 11x11 window fully inside the image, with a
/// Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 1.
double ssim(const Image& a, const Image& b);
/// Same, restricted to windows whose pixels are all flagged in `valid`.
double ssim(const Image& a, const Image& b, const ValidityMask& valid);

/// SSIM and PSNR over the pixels valid in both inputs (elapsed_ms left 0).
/// Throws kExtentMismatch or kTooSmall.
MetricReport compare_valid(const MaskedImage& a, const MaskedImage& b);

namespace reference {
/// Direct per-window evaluation, single-threaded.
double ssim(const Image& a, const Image& b);
}  // namespace reference

}  // namespace xstitch
