#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "stereonormal/baselines.hpp"
#include "stereonormal/errors.hpp"
#include "stereonormal/synth.hpp"
#include "support.hpp"

using namespace stereonormal;

namespace {

// Roots of det(lambda I - M) by bisection between the critical points of the
// characteristic cubic, in long double.
std::array<long double, 3> cubic_roots(const SymmetricMatrix3& m) {
  const long double c2 = -((long double)m.xx + m.yy + m.zz);
  const long double c1 = (long double)m.xx * m.yy + (long double)m.xx * m.zz + (long double)m.yy * m.zz -
                         (long double)m.xy * m.xy - (long double)m.xz * m.xz - (long double)m.yz * m.yz;
  const long double c0 = -((long double)m.xx * ((long double)m.yy * m.zz - (long double)m.yz * m.yz) -
                           (long double)m.xy * ((long double)m.xy * m.zz - (long double)m.yz * m.xz) +
                           (long double)m.xz * ((long double)m.xy * m.yz - (long double)m.yy * m.xz));
  auto f = [&](long double x) { return ((x + c2) * x + c1) * x + c0; };
  // f'(x) = 3x^2 + 2 c2 x + c1
  long double disc = c2 * c2 - 3.0L * c1;
  // Triple root: the cubic is (x + c2/3)^3 and bisection would only see its flat plateau.
  if (disc <= 1e-24L * c2 * c2) {
    const long double x = -c2 / 3.0L;
    return {x, x, x};
  }
  const long double r1 = (-c2 - std::sqrt(disc)) / 3.0L;
  const long double r2 = (-c2 + std::sqrt(disc)) / 3.0L;
  const long double bound = 1.0L + std::abs(m.xx) + std::abs(m.yy) + std::abs(m.zz) +
                            2.0L * (std::abs(m.xy) + std::abs(m.xz) + std::abs(m.yz));
  auto solve = [&](long double lo, long double hi) {
    long double flo = f(lo);
    const long double fhi = f(hi);
    if ((flo > 0) == (fhi > 0)) return std::abs(flo) < std::abs(fhi) ? lo : hi;  // touching root
    for (int i = 0; i < 200; ++i) {
      const long double mid = 0.5L * (lo + hi);
      const long double fm = f(mid);
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5L * (lo + hi);
  };
  return {solve(-bound, r1), solve(r1, r2), solve(r2, bound)};
}

SymmetricMatrix3 random_symmetric(std::mt19937_64& rng, bool& clustered) {
  std::uniform_real_distribution<double> e(-5.0, 5.0), pick(0.0, 1.0);
  SymmetricMatrix3 m{e(rng), e(rng), e(rng), e(rng), e(rng), e(rng)};
  clustered = false;
  // Mix in repeated spectra, R diag(a, a, b) R^T, and scaled copies.
  if (pick(rng) < 0.3) {
    clustered = true;
    const Vec3 w = testing::random_unit(rng);
    const double a = e(rng), b = pick(rng) < 0.5 ? a : e(rng);
    m = {a + (b - a) * w.x * w.x, (b - a) * w.x * w.y, (b - a) * w.x * w.z,
         a + (b - a) * w.y * w.y, (b - a) * w.y * w.z, a + (b - a) * w.z * w.z};
  }
  if (pick(rng) < 0.2) {
    const double s = std::pow(10.0, e(rng));
    m = {m.xx * s, m.xy * s, m.xz * s, m.yy * s, m.yz * s, m.zz * s};
  }
  return m;
}

}  // namespace

TEST_CASE("eigen decomposition examples") {
  const auto id = eig3_symmetric({1, 0, 0, 1, 0, 1});
  for (const auto& e : id) CHECK(e.value == doctest::Approx(1.0));

  const auto d = eig3_symmetric({3, 0, 0, 1, 0, 2});
  CHECK(d[0].value == doctest::Approx(1.0));
  CHECK(d[1].value == doctest::Approx(2.0));
  CHECK(d[2].value == doctest::Approx(3.0));
  CHECK(std::abs(d[0].vector.y) == doctest::Approx(1.0));
  CHECK(std::abs(d[1].vector.z) == doctest::Approx(1.0));
  CHECK(std::abs(d[2].vector.x) == doctest::Approx(1.0));

  const auto zero = eig3_symmetric({});
  for (const auto& e : zero) CHECK(e.value == 0.0);
}

TEST_CASE("eigen decomposition against characteristic-polynomial roots and Eigen") {
  std::mt19937_64 rng(1234);
  int generic = 0;
  for (int i = 0; i < 1500; ++i) {
    bool clustered = false;
    const SymmetricMatrix3 m = random_symmetric(rng, clustered);
    generic += clustered ? 0 : 1;
    const double mn = m.norm();
    const auto eig = eig3_symmetric(m);
    const auto roots = cubic_roots(m);

    Eigen::Matrix3d E;
    E << m.xx, m.xy, m.xz, m.xy, m.yy, m.yz, m.xz, m.yz, m.zz;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(E);

    for (int k = 0; k < 3; ++k) {
      const auto& e = eig[std::size_t(k)];
      CHECK(norm(m * e.vector - e.value * e.vector) <= 1e-8 * mn);
      // Polynomial roots lose half their digits at repeated eigenvalues.
      if (!clustered) CHECK(std::abs(e.value - double(roots[std::size_t(k)])) <= 1e-8 * mn);
      CHECK(std::abs(e.value - solver.eigenvalues()(k)) <= 1e-8 * mn);
      CHECK(norm(e.vector) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(std::abs(dot(eig[0].vector, eig[1].vector)) < 1e-8);
    CHECK(std::abs(dot(eig[0].vector, eig[2].vector)) < 1e-8);
    CHECK(std::abs(dot(eig[1].vector, eig[2].vector)) < 1e-8);
    CHECK(eig[0].value <= eig[1].value);
    CHECK(eig[1].value <= eig[2].value);

    const double sum = eig[0].value + eig[1].value + eig[2].value;
    const double prod = eig[0].value * eig[1].value * eig[2].value;
    CHECK(std::abs(sum - m.trace()) <= 1e-8 * std::max(mn, 1e-300));
    CHECK(std::abs(prod - m.determinant()) <= 1e-8 * mn * mn * mn);
  }
  CHECK(generic >= 1000);
}

TEST_CASE("plane fit is translation and permutation invariant") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({g(rng) * 2.0, g(rng), g(rng) * 0.2 + 5.0});
    const Vec3 n = *fit_plane_normal(pts);
    const Vec3 shift{g(rng) * 10, g(rng) * 10, g(rng) * 10};
    std::vector<Vec3> moved;
    for (const auto& p : pts) moved.push_back(p + shift);
    std::shuffle(moved.begin(), moved.end(), rng);
    CHECK(testing::angle_deg(*fit_plane_normal(moved), n) < 1e-6);
  }
  CHECK_FALSE(fit_plane_normal(std::vector<Vec3>{{0, 0, 1}, {1, 0, 1}}).has_value());
  CHECK_FALSE(fit_plane_normal(std::vector<Vec3>{{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {3, 0, 1}}).has_value());
}

TEST_CASE("PCA and cross product are exact on planes") {
  const StereoRig rig{600.0, 600.0, 40.0, 30.0, 0.3};
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 8; ++trial) {
    Vec3 n = testing::random_unit(rng);
    n = normalized(Vec3{n.x * 0.5, n.y * 0.5, -1.0});
    const auto gt = make_plane_scene(n, -5.0, rig, 80, 60);
    const auto pca = estimate_normals_pca(gt.disparity, rig, 5);
    const auto crs = estimate_normals_cross(gt.disparity, rig);
    CHECK(pca.valid_count() == 76u * 56u);
    CHECK(crs.valid_count() == 78u * 58u);
    for (std::size_t i = 0; i < gt.normals.size(); ++i) {
      if (pca.valid_at(i)) CHECK(testing::angle_deg(pca.values()[i], gt.normals.values()[i]) < 1e-4);
      if (crs.valid_at(i)) CHECK(testing::angle_deg(crs.values()[i], gt.normals.values()[i]) < 1e-4);
    }
  }
}

TEST_CASE("constant disparity gives the fronto-parallel normal") {
  ScalarField d(10, 8);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 10; ++u) d.set(u, v, 20.0);
  const StereoRig rig{500.0, 500.0, 5.0, 4.0, 0.2};
  const auto crs = estimate_normals_cross(d, rig);
  const auto pca = estimate_normals_pca(d, rig, 3);
  for (std::size_t i = 0; i < crs.size(); ++i) {
    if (crs.valid_at(i)) CHECK(testing::angle_deg(crs.values()[i], {0, 0, -1}) < 1e-9);
    if (pca.valid_at(i)) CHECK(testing::angle_deg(pca.values()[i], {0, 0, -1}) < 1e-9);
    if (crs.valid_at(i)) CHECK(crs.values()[i].z < 0.0);
  }
}

TEST_CASE("baseline masking rules") {
  ScalarField d(9, 9);
  for (int v = 0; v < 9; ++v)
    for (int u = 0; u < 9; ++u) d.set(u, v, 20.0 + 0.1 * u);
  d.invalidate(4, 3);
  const StereoRig rig{500.0, 500.0, 4.0, 4.0, 0.2};
  const auto crs = estimate_normals_cross(d, rig);
  CHECK_FALSE(crs.valid(4, 4));  // upper neighbour masked
  CHECK_FALSE(crs.valid(4, 3));
  CHECK(crs.valid(3, 3) == false);  // right neighbour masked
  CHECK(crs.valid(5, 5));
  CHECK_FALSE(crs.valid(0, 4));

  const auto pca = estimate_normals_pca(d, rig, 5);
  CHECK(pca.valid(4, 4));  // masked pixel inside the window is skipped
  CHECK_FALSE(pca.valid(4, 3));
  CHECK_FALSE(pca.valid(1, 4));  // window leaves the image
  CHECK_THROWS_AS(estimate_normals_pca(d, rig, 4), ArgumentError);
}

TEST_CASE("baseline outputs are unit and camera-facing on noisy input") {
  std::mt19937_64 rng(99);
  const auto d = testing::random_field(40, 30, rng, 10.0, 14.0, 0.1);
  const StereoRig rig{300.0, 300.0, 20.0, 15.0, 0.3};
  for (const auto& normals : {estimate_normals_pca(d, rig, 3), estimate_normals_pca(d, rig, 7),
                              estimate_normals_cross(d, rig)}) {
    for (int v = 0; v < 30; ++v)
      for (int u = 0; u < 40; ++u) {
        if (!normals.valid(u, v)) continue;
        CHECK(norm(normals(u, v)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dot(normals(u, v), *triangulate(u, v, d(u, v), rig)) <= 0.0);
      }
  }
}
