#include "stereonormal/affine_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace stereonormal {

KernelSpec KernelSpec::square(int width) {
  if (width < 3 || width % 2 == 0) throw ArgumentError("square kernel width must be odd and >= 3");
  const int r = width / 2;
  KernelSpec spec;
  spec.offsets.reserve(static_cast<std::size_t>(width) * width);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) spec.offsets.push_back({dx, dy});
  return spec;
}

void KernelSpec::validate() const {
  if (offsets.size() < 2) throw ArgumentError("kernel needs at least two offsets");
  std::set<Offset> seen(offsets.begin(), offsets.end());
  if (seen.size() != offsets.size()) throw ArgumentError("kernel offsets must be distinct");
}

PrecomputedKernels build_kernels(const KernelSpec& spec) {
  spec.validate();
  PrecomputedKernels k;
  k.offsets = spec.offsets;
  for (const auto& o : spec.offsets) {
    k.sum_xx += double(o.dx) * o.dx;
    k.sum_xy += double(o.dx) * o.dy;
    k.sum_yy += double(o.dy) * o.dy;
  }
  k.det = k.sum_xx * k.sum_yy - k.sum_xy * k.sum_xy;
  if (!(k.det > 1e-12 * std::max(1.0, k.sum_xx * k.sum_yy))) {
    throw SingularConfigurationError("kernel offsets are collinear (singular normal matrix)");
  }
  k.weights_u.reserve(spec.offsets.size());
  k.weights_v.reserve(spec.offsets.size());
  for (const auto& o : spec.offsets) {
    const double w1 = (k.sum_yy * o.dx - k.sum_xy * o.dy) / k.det;
    const double w2 = (-k.sum_xy * o.dx + k.sum_xx * o.dy) / k.det;
    k.weights_u.push_back(w1);
    k.weights_v.push_back(w2);
    k.sum_u += w1;
    k.sum_v += w2;
  }
  return k;
}

namespace {

struct Tap {
  std::ptrdiff_t shift;  // linear index offset
  double wu;
  double wv;
};

}  // namespace

AffineField convolve_affine(const ScalarField& disparity, const PrecomputedKernels& kernels) {
  const int w = disparity.width();
  const int h = disparity.height();
  AffineField out(w, h);
  if (kernels.offsets.empty() || w == 0 || h == 0) return out;

  int min_dx = 0, max_dx = 0, min_dy = 0, max_dy = 0;
  std::vector<Tap> taps;
  taps.reserve(kernels.offsets.size());
  for (std::size_t i = 0; i < kernels.offsets.size(); ++i) {
    const auto& o = kernels.offsets[i];
    min_dx = std::min(min_dx, o.dx);
    max_dx = std::max(max_dx, o.dx);
    min_dy = std::min(min_dy, o.dy);
    max_dy = std::max(max_dy, o.dy);
    taps.push_back({std::ptrdiff_t(o.dy) * w + o.dx, kernels.weights_u[i], kernels.weights_v[i]});
  }

  const double* d = disparity.values().data();
  const std::uint8_t* m = disparity.mask().data();
  const double sum_u = kernels.sum_u;
  const double sum_v = kernels.sum_v;

#pragma omp parallel for schedule(static)
  for (int v = -min_dy; v < h - max_dy; ++v) {
    for (int u = -min_dx; u < w - max_dx; ++u) {
      const std::size_t c = disparity.index(u, v);
      if (!m[c]) continue;
      double sum1 = 0.0;
      double sum2 = 0.0;
      bool ok = true;
      for (const Tap& t : taps) {
        const std::size_t j = c + t.shift;
        if (!m[j]) {
          ok = false;
          break;
        }
        sum1 += t.wu * d[j];
        sum2 += t.wv * d[j];
      }
      if (!ok) continue;
      out.set(u, v, {sum1 - d[c] * sum_u + 1.0, sum2 - d[c] * sum_v});
    }
  }
  return out;
}

std::optional<AffineParams> estimate_affine_direct(const ScalarField& disparity, int u, int v,
                                                   std::span<const Offset> offsets) {
  if (!disparity.in_bounds(u, v) || !disparity.valid(u, v)) return std::nullopt;
  const double dc = disparity(u, v);

  // Upper-triangular R = [r11 r12; 0 r22] and Q^T b accumulated row by row.
  double r11 = 0.0, r12 = 0.0, r22 = 0.0;
  double b1 = 0.0, b2 = 0.0;
  for (const auto& o : offsets) {
    const int pu = u + o.dx;
    const int pv = v + o.dy;
    if (!disparity.in_bounds(pu, pv) || !disparity.valid(pu, pv)) continue;
    double x = o.dx;
    double y = o.dy;
    double t = disparity(pu, pv) - dc;

    if (x != 0.0) {
      const double r = std::hypot(r11, x);
      const double c = r11 / r;
      const double s = x / r;
      r11 = r;
      const double nr12 = c * r12 + s * y;
      y = -s * r12 + c * y;
      r12 = nr12;
      const double nb1 = c * b1 + s * t;
      t = -s * b1 + c * t;
      b1 = nb1;
    }
    if (y != 0.0) {
      const double r = std::hypot(r22, y);
      const double c = r22 / r;
      const double s = y / r;
      r22 = r;
      const double nb2 = c * b2 + s * t;
      b2 = nb2;
    }
  }
  if (!(r11 > 0.0) || !(std::abs(r22) > 1e-9 * r11)) return std::nullopt;
  const double a2 = b2 / r22;
  const double a1m = (b1 - r12 * a2) / r11;
  return AffineParams{a1m + 1.0, a2};
}

NormalField normals_from_affine_field(const AffineField& affine, const ScalarField& disparity,
                                      const StereoRig& rig) {
  if (!affine.same_shape(disparity)) throw ArgumentError("affine field and disparity shapes differ");
  const int w = affine.width();
  const int h = affine.height();
  NormalField normals(w, h);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!affine.valid(u, v) || !disparity.valid(u, v)) continue;
      const auto X = triangulate(u, v, disparity(u, v), rig);
      if (!X) continue;
      if (auto n = normal_from_affine(warp_from_disparity_affine(affine(u, v)), *X, rig)) {
        normals.set(u, v, *n);
      }
    }
  }
  return normals;
}

NormalField estimate_normals_fixed(const ScalarField& disparity, const StereoRig& rig,
                                   const PrecomputedKernels& kernels) {
  rig.validate();
  return normals_from_affine_field(convolve_affine(disparity, kernels), disparity, rig);
}

NormalField estimate_normals_fixed(const ScalarField& disparity, const StereoRig& rig,
                                   const KernelSpec& spec) {
  return estimate_normals_fixed(disparity, rig, build_kernels(spec));
}

std::string format_kernels(const PrecomputedKernels& k) {
  std::ostringstream os;
  char buf[64];
  auto num = [&buf](double x) {
    std::snprintf(buf, sizeof buf, "%+.10f", x == 0.0 ? 0.0 : x);
    return std::string(buf);
  };
  auto g = [&buf](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };

  int min_dx = 0, max_dx = 0, min_dy = 0, max_dy = 0;
  for (const auto& o : k.offsets) {
    min_dx = std::min(min_dx, o.dx);
    max_dx = std::max(max_dx, o.dx);
    min_dy = std::min(min_dy, o.dy);
    max_dy = std::max(max_dy, o.dy);
  }

  os << "offsets " << k.offsets.size() << "\n";
  os << "sum_xx " << g(k.sum_xx) << "\nsum_xy " << g(k.sum_xy) << "\nsum_yy " << g(k.sum_yy) << "\n";
  os << "det " << g(k.det) << "\nsum_u " << g(k.sum_u) << "\nsum_v " << g(k.sum_v) << "\n";

  auto grid = [&](const char* name, const std::vector<double>& s) {
    os << name << " [dy, dx]\n";
    for (int dy = min_dy; dy <= max_dy; ++dy) {
      for (int dx = min_dx; dx <= max_dx; ++dx) {
        const auto it = std::find(k.offsets.begin(), k.offsets.end(), Offset{dx, dy});
        std::string cell = it == k.offsets.end() ? "." : num(s[std::size_t(it - k.offsets.begin())]);
        std::snprintf(buf, sizeof buf, "%14s [%d,%d]", cell.c_str(), dy, dx);
        os << (dx == min_dx ? "" : " ") << buf;
      }
      os << "\n";
    }
  };
  grid("weights_u", k.weights_u);
  grid("weights_v", k.weights_v);
  return os.str();
}

}  // namespace stereonormal
