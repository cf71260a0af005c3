#include <cmath>

#include "doctest.h"
#include "xstitch/error.hpp"
#include "xstitch/homography.hpp"

using namespace xstitch;

TEST_SUITE("homography") {

TEST_CASE("apply divides by w") {
  // [2 0 1; 0 3 2; 0.5 0 1] (4, 2): u = 9, v = 8, w = 3
  const auto h = Homography::from_rows({2, 0, 1, 0, 3, 2, 0.5, 0, 1});
  const Point2 p = apply_homography(h, {4, 2});
  CHECK(p.x == doctest::Approx(3.0));
  CHECK(p.y == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("constructor normalizes by the bottom-right entry") {
  Eigen::Matrix3d m;
  m << 2, 0, 4, 0, 2, 6, 0, 0, 2;
  const Homography h(m);
  CHECK(h(2, 2) == 1.0);
  CHECK(h(0, 2) == 2.0);
  CHECK(h(1, 1) == 1.0);
}

TEST_CASE("singular and degenerate inputs throw") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(2, 2) = 1;
  CHECK_THROWS_AS(Homography{m}, StitchError);
  Eigen::Matrix3d z = Eigen::Matrix3d::Identity();
  z(2, 2) = 0;
  CHECK_THROWS_AS(Homography{z}, StitchError);
  // w = 0.5 x + 1 vanishes at x = -2
  const auto h = Homography::from_rows({1, 0, 0, 0, 1, 0, 0.5, 0, 1});
  try {
    apply_homography(h, {-2, 0});
    FAIL("expected a throw");
  } catch (const StitchError& e) {
    CHECK(e.kind() == ErrorKind::kProjectiveDivideByZero);
  }
}

TEST_CASE("compose applies the right factor first") {
  const auto t = Homography::translation(3, -1);
  const auto s = Homography::scaling(2, 2);
  const Point2 p = apply_homography(compose(t, s), {1, 1});  // scale then shift
  CHECK(p.x == doctest::Approx(5.0));
  CHECK(p.y == doctest::Approx(1.0));
  const Point2 q = apply_homography(compose(s, t), {1, 1});  // shift then scale
  CHECK(q.x == doctest::Approx(8.0));
  CHECK(q.y == doctest::Approx(0.0));
}

TEST_CASE("invert round-trips a projective map") {
  const auto h = Homography::from_rows({1.02, 0.03, 5, -0.01, 0.98, -7, 1e-4, -2e-4, 1});
  const auto hi = invert(h);
  for (Point2 p : {Point2{0, 0}, Point2{100, 40}, Point2{511, 511}}) {
    const Point2 back = apply_homography(hi, apply_homography(h, p));
    CHECK(back.x == doctest::Approx(p.x).epsilon(1e-12));
    CHECK(back.y == doctest::Approx(p.y).epsilon(1e-12));
  }
  CHECK(max_entry_difference(compose(h, hi), Homography::identity()) < 1e-12);
}

TEST_CASE("max corner error of two translations is their offset") {
  const auto a = Homography::translation(1, 2);
  const auto b = Homography::translation(4, 6);
  CHECK(max_corner_error(a, b, 100, 50) == doctest::Approx(5.0));
}

TEST_CASE("max corner error picks the worst corner") {
  // scaling about the origin moves (w, h) the most
  const auto s = Homography::scaling(1.1, 1.1);
  CHECK(max_corner_error(s, Homography::identity(), 30, 40) == doctest::Approx(0.1 * 50.0));
}

TEST_CASE("warped bounds of a translation") {
  const BoundingBox b = warped_bounds(Homography::translation(-2.5, 3), 10, 20);
  CHECK(b.x0 == -2.5);
  CHECK(b.x1 == 7.5);
  CHECK(b.y0 == 3.0);
  CHECK(b.y1 == 23.0);
}

}
