#pragma once

#include "xstitch/homography.hpp"
#include "xstitch/image.hpp"

namespace xstitch {

/// Inverse-mapping warp with bilinear sampling. Canvas pixel (c, r) samples
/// `src` at invert(h) * (canvas.x0 + c, canvas.y0 + r). Pixels whose source
/// coordinate falls outside [0, w-1] x [0, h-1] are 0 and invalid.
MaskedImage warp_image(const Image& src, const Homography& h, const BoundingBox& canvas);

/// Bilinear sample at subpixel (x, y); caller guarantees the point is inside
/// [0, w-1] x [0, h-1].
double sample_bilinear(const Image& src, double x, double y);

namespace reference {
/// Single-threaded twin of warp_image, kept for tests and benchmarks.
MaskedImage warp_image(const Image& src, const Homography& h, const BoundingBox& canvas);
}  // namespace reference

}  // namespace xstitch
