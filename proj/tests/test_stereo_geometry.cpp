#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "stereonormal/errors.hpp"
#include "stereonormal/stereo_geometry.hpp"
#include "support.hpp"

using namespace stereonormal;
using testing::angle_deg;

namespace {

StereoRig rig_1000() { return StereoRig{1000.0, 1000.0, 320.0, 240.0, 0.5}; }

// Right-image column seen at left pixel (u, v) on the plane {X : n.X = c},
// intersecting the viewing ray directly.
double right_column_on_plane(const Vec3& n, double c, double u, double v, const StereoRig& rig) {
  const Vec3 ray{(u - rig.u0) / rig.fx, (v - rig.v0) / rig.fy, 1.0};
  const double z = c / dot(n, ray);
  const Vec3 X = z * ray;
  return rig.fx * (X.x - rig.baseline) / X.z + rig.u0;
}

}  // namespace

TEST_CASE("depth from disparity") {
  const StereoRig rig{1000.0, 1000.0, 0.0, 0.0, 0.5};
  CHECK(*disparity_to_depth(100.0, rig) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_FALSE(disparity_to_depth(0.0, rig).has_value());
  CHECK_FALSE(disparity_to_depth(-1.0, rig).has_value());
  CHECK_FALSE(disparity_to_depth(std::numeric_limits<double>::quiet_NaN(), rig).has_value());
  for (double z : {0.1, 3.0, 15.5}) {
    const double back = *disparity_to_depth(*depth_to_disparity(z, rig), rig);
    CHECK(std::abs(back - z) <= std::nextafter(z, 1e9) - z);
  }
}

TEST_CASE("depth field keeps the mask") {
  ScalarField d(3, 1);
  d.set(0, 0, 100.0);
  d.set(1, 0, -2.0);
  const auto z = disparity_to_depth(d, StereoRig{1000.0, 1000.0, 0.0, 0.0, 0.5});
  CHECK(z.valid(0, 0));
  CHECK(z(0, 0) == doctest::Approx(5.0));
  CHECK_FALSE(z.valid(1, 0));
  CHECK_FALSE(z.valid(2, 0));
}

TEST_CASE("triangulation examples") {
  const StereoRig rig = rig_1000();
  const auto centre = *triangulate(rig.u0, rig.v0, 37.0, rig);
  CHECK(centre.x == 0.0);
  CHECK(centre.y == 0.0);

  const auto X = *triangulate(rig.u0 + 100.0, rig.v0, 100.0, rig);
  CHECK(X.x == doctest::Approx(0.5));
  CHECK(X.y == doctest::Approx(0.0));
  CHECK(X.z == doctest::Approx(5.0));

  const auto left = project_left(X, rig);
  const auto right = project_right(X, rig);
  CHECK(left.u == doctest::Approx(rig.u0 + 100.0));
  CHECK(left.v == doctest::Approx(rig.v0));
  CHECK(right.u == doctest::Approx(rig.u0 + 100.0 - 100.0));
  CHECK(right.v == doctest::Approx(rig.v0));

  CHECK_FALSE(triangulate(1.0, 1.0, 0.0, rig).has_value());
}

TEST_CASE("reprojection closure over random pixels") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pix(-500.0, 1500.0), disp(0.01, 300.0);
  const StereoRig rig{812.5, 790.0, 401.2, 277.9, 0.27};
  for (int i = 0; i < 5000; ++i) {
    const double u = pix(rng), v = pix(rng), d = disp(rng);
    const Vec3 X = *triangulate(u, v, d, rig);
    const auto l = project_left(X, rig);
    const auto r = project_right(X, rig);
    CHECK(testing::close_rel(l.u, u, 1e-9));
    CHECK(testing::close_rel(l.v, v, 1e-9));
    CHECK(testing::close_rel(r.u, u - d, 1e-9));
  }
}

TEST_CASE("orientation toward the camera") {
  const Vec3 X{0, 0, 5};
  CHECK(*orient_toward_camera({0, 0, 1}, X) == Vec3{0, 0, -1});
  CHECK(*orient_toward_camera({0, 0, -1}, X) == Vec3{0, 0, -1});
  CHECK(*orient_toward_camera({1, 0, 0}, X) == Vec3{1, 0, 0});
  CHECK_FALSE(orient_toward_camera({0, 0, 0}, X).has_value());
}

TEST_CASE("affine_from_normal examples") {
  const StereoRig rig{1000.0, 1000.0, 0.0, 0.0, 0.5};
  const auto front = affine_from_normal({0, 0, -1}, {0.3, -0.2, 4.0}, rig);
  CHECK(front.a1 == doctest::Approx(1.0));
  CHECK(front.a2 == doctest::Approx(0.0));

  const auto side = affine_from_normal({1, 0, 0}, {2, 0, 5}, rig);
  CHECK(side.a1 == doctest::Approx(0.75));
  CHECK(side.a2 == doctest::Approx(0.0));

  const auto floor = affine_from_normal({0, 1, 0}, {0, 2, 5}, rig);
  CHECK(floor.a1 == doctest::Approx(1.0));
  CHECK(floor.a2 == doctest::Approx(-0.25));

  CHECK_THROWS_AS(affine_from_normal({1, 0, 0}, {0, 0, 5}, rig), DegeneratePlaneError);
}

TEST_CASE("affine_from_normal matches the plane-induced warp Jacobian") {
  // Oracle: central differences of the right-image column over the left image,
  // computed by intersecting rays with the plane.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pix(0.0, 640.0), depth(2.0, 20.0);
  const StereoRig rig{700.0, 650.0, 320.0, 240.0, 0.4};
  int checked = 0;
  while (checked < 300) {
    const Vec3 n = testing::random_unit(rng);
    const double u = pix(rng), v = pix(rng) * 0.75;
    const Vec3 X = *triangulate(u, v, rig.fx * rig.baseline / depth(rng), rig);
    if (std::abs(dot(n, X)) < 0.2 * norm(X)) continue;
    const double c = dot(n, X);
    const double h = 1e-3;
    const double du = (right_column_on_plane(n, c, u + h, v, rig) - right_column_on_plane(n, c, u - h, v, rig)) / (2 * h);
    const double dv = (right_column_on_plane(n, c, u, v + h, rig) - right_column_on_plane(n, c, u, v - h, rig)) / (2 * h);
    const auto a = affine_from_normal(n, X, rig);
    CHECK(a.a1 == doctest::Approx(du).epsilon(1e-6));
    CHECK(a.a2 == doctest::Approx(dv).epsilon(1e-6).scale(1.0));
    ++checked;
  }
}

TEST_CASE("affine_from_normal is scale invariant in the normal") {
  std::mt19937_64 rng(5);
  const StereoRig rig = rig_1000();
  for (int i = 0; i < 200; ++i) {
    const Vec3 n = testing::random_unit(rng);
    const Vec3 X{0.3, -0.4, 6.0};
    if (std::abs(dot(n, X)) < 0.1) continue;
    const auto a = affine_from_normal(n, X, rig);
    for (double s : {-3.0, 0.01, 250.0}) {
      const auto b = affine_from_normal(s * n, X, rig);
      CHECK(b.a1 == doctest::Approx(a.a1).epsilon(1e-12));
      CHECK(b.a2 == doctest::Approx(a.a2).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("normal_from_affine examples and roundtrip") {
  const StereoRig rig{1000.0, 1000.0, 0.0, 0.0, 0.5};
  CHECK(*normal_from_affine({1.0, 0.0}, {0.2, 0.1, 3.0}, rig) == Vec3{0, 0, -1});

  const Vec3 Xa{2, 0, 5};
  const auto na = *normal_from_affine(affine_from_normal({1, 0, 0}, Xa, rig), Xa, rig);
  CHECK(angle_deg(na, {1, 0, 0}) < 1e-6);
  const Vec3 Xb{0, 2, 5};
  const auto nb = *normal_from_affine(affine_from_normal({0, 1, 0}, Xb, rig), Xb, rig);
  CHECK(angle_deg(nb, {0, 1, 0}) < 1e-6);

  CHECK_FALSE(normal_from_affine({1.0, 0.0}, {0, 0, -1}, rig).has_value());
}

TEST_CASE("normal_from_affine matches the closed-form direction") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coef(-0.5, 2.5), pos(-3.0, 3.0), depth(1.0, 30.0);
  const StereoRig rig{900.0, 870.0, 0.0, 0.0, 0.3};
  for (int i = 0; i < 1000; ++i) {
    const AffineParams a{coef(rng), coef(rng) - 1.0};
    const Vec3 X{pos(rng), pos(rng), depth(rng)};
    const double b = rig.baseline;
    const Vec3 closed{(a.a1 - 1.0) * rig.fx * X.z, a.a2 * rig.fy * X.z,
                      -(a.a1 - 1.0) * rig.fx * X.x - a.a2 * rig.fy * X.y - b * rig.fx};
    const auto n = normal_from_affine(a, X, rig);
    REQUIRE(n.has_value());
    CHECK(angle_deg(*n, closed) < 1e-8);
    CHECK(norm(*n) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(*n, X) <= 0.0);
  }
}

TEST_CASE("fitted disparity slopes map onto warp parameters") {
  // d = u_l - u_r, so u_r = u_l - d and the warp Jacobian is 1 - dd/du, -dd/dv.
  constexpr AffineParams fitted{1.3, -0.2};
  constexpr AffineParams warp = warp_from_disparity_affine(fitted);
  static_assert(warp.a1 == 2.0 - 1.3 && warp.a2 == 0.2);
  CHECK(warp_from_disparity_affine(warp).a1 == doctest::Approx(fitted.a1));
}

TEST_CASE("rig validation") {
  CHECK_NOTHROW(StereoRig{}.validate());
  CHECK_THROWS_AS((StereoRig{0.0, 1.0, 0.0, 0.0, 1.0}.validate()), ArgumentError);
  CHECK_THROWS_AS((StereoRig{1.0, 1.0, 0.0, 0.0, -1.0}.validate()), ArgumentError);
  CHECK_THROWS_AS((StereoRig{1.0, std::numeric_limits<double>::infinity(), 0.0, 0.0, 1.0}.validate()),
                  ArgumentError);
}
