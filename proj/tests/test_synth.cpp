#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stereonormal/errors.hpp"
#include "stereonormal/synth.hpp"
#include "support.hpp"

using namespace stereonormal;

TEST_CASE("sphere centre pixel") {
  const SceneSpec scene = sphere_benchmark_scene();
  const auto gt = raycast(scene);
  REQUIRE(gt.depth.valid(512, 512));
  CHECK(gt.depth(512, 512) == doctest::Approx(1.6).epsilon(1e-14));
  CHECK(gt.disparity(512, 512) == doctest::Approx(1024.0 * 0.3 / 1.6).epsilon(1e-14));
  CHECK(testing::angle_deg(gt.normals(512, 512), {0, 0, -1}) < 1e-9);
  CHECK_FALSE(gt.depth.valid(0, 0));  // corner ray misses the sphere
  CHECK_FALSE(gt.normals.valid(0, 0));
}

TEST_CASE("sphere surface normals and channel consistency") {
  SceneSpec scene = sphere_benchmark_scene(128, 128);
  scene.rig.fx = scene.rig.fy = 128.0;
  const auto gt = raycast(scene);
  const Vec3 c{0, 0, 3};
  std::size_t hits = 0;
  for (int v = 0; v < 128; ++v)
    for (int u = 0; u < 128; ++u) {
      CHECK(gt.depth.valid(u, v) == gt.disparity.valid(u, v));
      CHECK(gt.depth.valid(u, v) == gt.normals.valid(u, v));
      if (!gt.depth.valid(u, v)) continue;
      ++hits;
      CHECK(testing::close_rel(gt.disparity(u, v), scene.rig.fx * scene.rig.baseline / gt.depth(u, v), 1e-12));
      const Vec3 P = *triangulate(u, v, gt.disparity(u, v), scene.rig);
      CHECK(std::abs(norm(P - c) - 1.4) < 1e-9);
      CHECK(testing::angle_deg(gt.normals(u, v), (P - c) / 1.4) < 1e-9);
      CHECK(dot(gt.normals(u, v), P) <= 0.0);
    }
  CHECK(hits > 1000);
}

TEST_CASE("halving the resolution samples the same surface") {
  SceneSpec full = sphere_benchmark_scene(128, 128);
  full.rig = {256.0, 256.0, 64.0, 64.0, 0.3};
  SceneSpec half = full;
  half.width = half.height = 64;
  half.rig = {128.0, 128.0, 32.0, 32.0, 0.3};
  const auto a = raycast(full);
  const auto b = raycast(half);
  for (int v = 0; v < 64; v += 3)
    for (int u = 0; u < 64; u += 3) {
      REQUIRE(b.depth.valid(u, v) == a.depth.valid(2 * u, 2 * v));
      if (!b.depth.valid(u, v)) continue;
      CHECK(b.depth(u, v) == doctest::Approx(a.depth(2 * u, 2 * v)).epsilon(1e-12));
    }
}

TEST_CASE("boxes and planes") {
  SceneSpec scene;
  scene.width = 40;
  scene.height = 30;
  scene.rig = {40.0, 40.0, 20.0, 15.0, 0.2};
  scene.primitives.push_back(Plane{{0, 0, -1}, -5.0});
  scene.primitives.push_back(Box{{-0.3, -0.3, 2.0}, {0.3, 0.3, 3.0}});
  scene.primitives.push_back(Box{{1.0, -0.5, 4.0}, {2.0, 0.5, 4.5}});
  const auto gt = raycast(scene);
  CHECK(gt.depth.valid_count() == 40u * 30u);
  CHECK(gt.depth(0, 0) == doctest::Approx(5.0));
  CHECK(testing::angle_deg(gt.normals(0, 0), {0, 0, -1}) < 1e-12);
  CHECK(gt.depth(20, 15) == doctest::Approx(2.0));  // box front face
  CHECK(testing::angle_deg(gt.normals(20, 15), {0, 0, -1}) < 1e-12);
  // Column 29 passes left of the second box's front face and meets its x = 1 side.
  CHECK(gt.depth(29, 15) == doctest::Approx(40.0 / 9.0));
  CHECK(testing::angle_deg(gt.normals(29, 15), {-1, 0, 0}) < 1e-12);
  CHECK(gt.normals(29, 15).x < 0.0);
  CHECK(gt.depth(35, 15) == doctest::Approx(4.0));
}

TEST_CASE("plane scene disparity is affine in pixel coordinates") {
  const StereoRig rig{500.0, 480.0, 50.0, 40.0, 0.35};
  const Vec3 n = normalized(Vec3{0.2, -0.3, -1.0});
  const auto gt = make_plane_scene(n, -4.0, rig, 100, 80);
  Eigen::MatrixXd A(100 * 80, 3);
  Eigen::VectorXd y(100 * 80);
  for (int v = 0; v < 80; ++v)
    for (int u = 0; u < 100; ++u) {
      const int i = v * 100 + u;
      A(i, 0) = 1.0;
      A(i, 1) = u;
      A(i, 2) = v;
      y(i) = gt.disparity(u, v);
    }
  const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(y);
  CHECK((A * coef - y).cwiseAbs().maxCoeff() < 1e-10);

  const auto flat = make_plane_scene({0, 0, -1}, -5.0, rig, 10, 10);
  for (std::size_t i = 0; i < flat.depth.size(); ++i) {
    CHECK(flat.depth.values()[i] == doctest::Approx(5.0));
    CHECK(flat.disparity.values()[i] == doctest::Approx(500.0 * 0.35 / 5.0));
  }
  CHECK_THROWS_AS(make_plane_scene(n, 0.0, rig, 10, 10), ArgumentError);
  CHECK_THROWS_AS(make_plane_scene({1, 0, 0}, -1.0, rig, 100, 80), ArgumentError);  // horizon in frame
}

TEST_CASE("gaussian noise") {
  ScalarField f(1000, 1000);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.values()[i] = 10.0;
    f.set_valid(i, true);
  }
  f.invalidate(3, 3);
  CHECK(add_gaussian_noise(f, 0.0, 1) == f);
  const auto a = add_gaussian_noise(f, 0.2, 42);
  const auto b = add_gaussian_noise(f, 0.2, 42);
  CHECK(a == b);
  CHECK_FALSE(add_gaussian_noise(f, 0.2, 43) == a);
  CHECK(std::equal(a.mask().begin(), a.mask().end(), f.mask().begin()));
  CHECK(a(3, 3) == 10.0);

  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.valid_at(i)) continue;
    const double e = a.values()[i] - 10.0;
    sum += e;
    sq += e * e;
    ++n;
  }
  const double mean = sum / double(n);
  const double sd = std::sqrt(sq / double(n) - mean * mean);
  // Standard errors for 1e6 draws: 2e-4 on the mean, 1.4e-4 on the std.
  CHECK(std::abs(mean) < 0.001);
  CHECK(std::abs(sd - 0.2) < 0.002);
  CHECK_THROWS_AS(add_gaussian_noise(f, -0.1, 1), ArgumentError);
}

TEST_CASE("scene file roundtrip and defaults") {
  const std::string text = R"(# two objects
width 64
height 48
rig {
  fx 100
  baseline 0.25
}
sphere {
  center 0 0 4
  radius 1
}
plane {
  normal 0 0 -2
  offset -16
}
)";
  const SceneSpec scene = parse_scene(text);
  CHECK(scene.width == 64);
  CHECK(scene.rig.fy == 100.0);
  CHECK(scene.rig.u0 == 32.0);
  CHECK(scene.rig.v0 == 24.0);
  REQUIRE(scene.primitives.size() == 2);
  const auto& plane = std::get<Plane>(scene.primitives[1]);
  CHECK(plane.normal.z == doctest::Approx(-1.0));
  CHECK(plane.offset == doctest::Approx(-8.0));

  const SceneSpec again = parse_scene(format_scene(scene));
  CHECK(again.rig == scene.rig);
  CHECK(raycast(again).depth == raycast(scene).depth);
}

TEST_CASE("shipped scene files parse") {
  for (const char* name : {"sphere.scn", "boxes.scn"}) {
    std::ifstream in(std::string(STEREONORMAL_SCENE_DIR) + "/" + name);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    const SceneSpec scene = parse_scene(ss.str());
    CHECK(scene.rig.baseline == 0.3);
    CHECK(scene.rig.fx == 1024.0);
  }
}

TEST_CASE("scene and rig parse errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      (void)parse_scene(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("width 10\nheight 10\nrig {\n fx 1\n baseline 1\n}\nsphere {\n center 0 0\n radius 1\n}\n") == 8);
  CHECK(line_of("width 10\nheight 10\nrig {\n fx 1\n baseline 1\n}\ncone {\n}\n") == 7);
  CHECK(line_of("width 10\nheight x\n") == 2);
  CHECK(line_of("width 10\nheight 10\nrig {\n fx 1\n") > 0);
  CHECK(line_of("width 10\nheight 10\n") > 0);
  CHECK(line_of("width 10\nheight 10\nrig {\n fx -1\n baseline 1\n}\n") > 0);

  const StereoRig rig = parse_rig("fx 700\nbaseline 0.1\n", 640, 480);
  CHECK(rig.fy == 700.0);
  CHECK(rig.u0 == 320.0);
  CHECK(rig.v0 == 240.0);
  CHECK(parse_rig(format_rig(rig)) == rig);
  CHECK_THROWS_AS(parse_rig("fx 700\nbaseline 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_rig("fx 700\n", 10, 10), ConfigError);
  CHECK_THROWS_AS(parse_rig("fx 700\nbaseline 0.1\nzoom 2\n", 10, 10), ConfigError);
}
