#include "stereonormal/synth.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

namespace stereonormal {

void SceneSpec::validate() const {
  rig.validate();
  if (width <= 0 || height <= 0) throw ArgumentError("scene resolution must be positive");
  for (const auto& p : primitives) {
    if (const auto* s = std::get_if<Sphere>(&p)) {
      if (!(s->radius > 0.0)) throw ArgumentError("sphere radius must be positive");
    } else if (const auto* b = std::get_if<Box>(&p)) {
      if (!(b->min.x < b->max.x && b->min.y < b->max.y && b->min.z < b->max.z)) {
        throw ArgumentError("box min must be below max componentwise");
      }
    } else if (const auto* pl = std::get_if<Plane>(&p)) {
      if (std::abs(norm(pl->normal) - 1.0) > 1e-9) throw ArgumentError("plane normal must be unit length");
    }
  }
}

namespace {

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 normal;
};

constexpr double kMinT = 1e-9;

std::optional<Hit> intersect(const Sphere& s, const Vec3& dir) {
  // |t dir - c|^2 = r^2
  const double a = dot(dir, dir);
  const double half_b = -dot(dir, s.center);
  const double c = dot(s.center, s.center) - s.radius * s.radius;
  const double disc = half_b * half_b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double qq = -half_b + std::copysign(root, -half_b);
  double t0 = qq / a;
  double t1 = c / qq;
  if (qq == 0.0) t0 = t1 = -half_b / a;
  if (t0 > t1) std::swap(t0, t1);
  const double t = t0 > kMinT ? t0 : t1;
  if (!(t > kMinT)) return std::nullopt;
  return Hit{t, (t * dir - s.center) / s.radius};
}

std::optional<Hit> intersect(const Box& b, const Vec3& dir) {
  const double lo[3] = {b.min.x, b.min.y, b.min.z};
  const double hi[3] = {b.max.x, b.max.y, b.max.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1, far_axis = -1;
  double near_sign = 0.0, far_sign = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (lo[i] > 0.0 || hi[i] < 0.0) return std::nullopt;
      continue;
    }
    double t0 = lo[i] / d[i];
    double t1 = hi[i] / d[i];
    // Entering through the face whose outward normal opposes the ray.
    double s0 = -1.0, s1 = 1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      std::swap(s0, s1);
    }
    if (t0 > t_near) {
      t_near = t0;
      near_axis = i;
      near_sign = s0;
    }
    if (t1 < t_far) {
      t_far = t1;
      far_axis = i;
      far_sign = s1;
    }
  }
  if (t_near > t_far) return std::nullopt;
  auto axis_normal = [](int axis, double sign) {
    Vec3 n;
    (axis == 0 ? n.x : axis == 1 ? n.y : n.z) = sign;
    return n;
  };
  if (t_near > kMinT && near_axis >= 0) return Hit{t_near, axis_normal(near_axis, near_sign)};
  if (t_far > kMinT && far_axis >= 0) return Hit{t_far, axis_normal(far_axis, far_sign)};
  return std::nullopt;
}

std::optional<Hit> intersect(const Plane& p, const Vec3& dir) {
  const double denom = dot(p.normal, dir);
  if (denom == 0.0) return std::nullopt;
  const double t = p.offset / denom;
  if (!(t > kMinT) || !std::isfinite(t)) return std::nullopt;
  return Hit{t, p.normal};
}

Vec3 pixel_ray(const StereoRig& rig, int u, int v) {
  return {(u - rig.u0) / rig.fx, (v - rig.v0) / rig.fy, 1.0};
}

GroundTruth empty_truth(int w, int h) {
  return {ScalarField(w, h), ScalarField(w, h), NormalField(w, h)};
}

}  // namespace

GroundTruth raycast(const SceneSpec& scene) {
  scene.validate();
  const int w = scene.width;
  const int h = scene.height;
  GroundTruth gt = empty_truth(w, h);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Vec3 dir = pixel_ray(scene.rig, u, v);
      Hit best;
      for (const auto& prim : scene.primitives) {
        const auto hit = std::visit([&dir](const auto& p) { return intersect(p, dir); }, prim);
        if (hit && hit->t < best.t) best = *hit;
      }
      if (!std::isfinite(best.t)) continue;
      // dir.z == 1, so the ray parameter is the depth.
      const Vec3 X = best.t * dir;
      const auto n = orient_toward_camera(normalized(best.normal), X);
      const auto d = depth_to_disparity(X.z, scene.rig);
      if (!n || !d) continue;
      gt.depth.set(u, v, X.z);
      gt.disparity.set(u, v, *d);
      gt.normals.set(u, v, *n);
    }
  }
  return gt;
}

ScalarField add_gaussian_noise(const ScalarField& field, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("noise sigma must be >= 0");
  ScalarField out = field;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (out.valid_at(i)) values[i] += noise(rng);
  }
  return out;
}

GroundTruth make_plane_scene(const Vec3& normal, double offset, const StereoRig& rig, int width,
                             int height) {
  rig.validate();
  if (width <= 0 || height <= 0) throw ArgumentError("scene resolution must be positive");
  const double len = norm(normal);
  if (!(len > 0.0) || !std::isfinite(len)) throw ArgumentError("plane normal must be non-zero");
  if (offset == 0.0 || !std::isfinite(offset)) {
    throw ArgumentError("plane passes through the camera centre");
  }
  const Vec3 n = normal / len;
  const double off = offset / len;

  GroundTruth gt = empty_truth(width, height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const Vec3 dir = pixel_ray(rig, u, v);
      const double denom = dot(n, dir);
      const double z = off / denom;
      // Grazing rays (denominator ~ 0) put the horizon inside the frame.
      if (!(std::abs(denom) > 1e-9 * norm(dir)) || !(z > 0.0) || !std::isfinite(z)) {
        throw ArgumentError("plane is not visible in front of the camera at every pixel");
      }
      const Vec3 X = z * dir;
      gt.depth.set(u, v, z);
      gt.disparity.set(u, v, rig.fx * rig.baseline / z);
      gt.normals.set(u, v, *orient_toward_camera(n, X));
    }
  }
  return gt;
}

SceneSpec sphere_benchmark_scene(int width, int height) {
  SceneSpec scene;
  scene.width = width;
  scene.height = height;
  scene.rig = StereoRig{1024.0, 1024.0, width / 2.0, height / 2.0, 0.3};
  scene.primitives.push_back(Sphere{{0.0, 0.0, 3.0}, 1.4});
  return scene;
}

// ---------------------------------------------------------------------------
// Key-value scene format

namespace {

struct Node {
  std::string key;
  std::vector<double> values;
  std::vector<Node> children;
  int line = 0;
};

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) words.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

double parse_number(const std::string& word, int line) {
  double x = 0.0;
  const char* first = word.data();
  const char* last = word.data() + word.size();
  if (!word.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc{} || ptr != last || !std::isfinite(x)) {
    throw ConfigError("expected a finite number, got '" + word + "'", line);
  }
  return x;
}

Node parse_tree(std::string_view text) {
  Node root;
  std::vector<Node*> stack{&root};
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto words = split_words(line);
    if (words.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (words.size() == 1 && words[0] == "}") {
      if (stack.size() == 1) throw ConfigError("unmatched '}'", line_no);
      stack.pop_back();
    } else if (words.back() == "{") {
      if (words.size() != 2) throw ConfigError("block header must be '<name> {'", line_no);
      Node child;
      child.key = words[0];
      child.line = line_no;
      stack.back()->children.push_back(std::move(child));
      stack.push_back(&stack.back()->children.back());
    } else {
      Node leaf;
      leaf.key = words[0];
      leaf.line = line_no;
      for (std::size_t i = 1; i < words.size(); ++i) leaf.values.push_back(parse_number(words[i], line_no));
      stack.back()->children.push_back(std::move(leaf));
    }
    if (end == text.size()) break;
  }
  if (stack.size() != 1) throw ConfigError("unterminated block '" + stack.back()->key + "'", line_no);
  return root;
}

double scalar(const Node& n) {
  if (n.values.size() != 1 || !n.children.empty()) {
    throw ConfigError("'" + n.key + "' expects one number", n.line);
  }
  return n.values[0];
}

Vec3 vector3(const Node& n) {
  if (n.values.size() != 3 || !n.children.empty()) {
    throw ConfigError("'" + n.key + "' expects three numbers", n.line);
  }
  return {n.values[0], n.values[1], n.values[2]};
}

int integer(const Node& n) {
  const double x = scalar(n);
  if (x != std::floor(x) || x < 1 || x > 1 << 20) {
    throw ConfigError("'" + n.key + "' expects a positive integer", n.line);
  }
  return static_cast<int>(x);
}

/// Applies rig keys from `node`'s children; returns false for unknown keys.
bool apply_rig_key(const Node& n, StereoRig& rig) {
  if (n.key == "fx") rig.fx = scalar(n);
  else if (n.key == "fy") rig.fy = scalar(n);
  else if (n.key == "u0") rig.u0 = scalar(n);
  else if (n.key == "v0") rig.v0 = scalar(n);
  else if (n.key == "baseline") rig.baseline = scalar(n);
  else return false;
  return true;
}

// fx and baseline are required, fy defaults to fx, a missing principal point
// coordinate defaults to the image centre (needs a positive size).
StereoRig rig_from_block(const Node& block, int width, int height) {
  static constexpr const char* keys[5] = {"fx", "fy", "u0", "v0", "baseline"};
  bool has[5] = {};
  StereoRig rig;
  for (const auto& c : block.children) {
    if (c.key == "rig" && !c.children.empty()) continue;
    if (!apply_rig_key(c, rig)) throw ConfigError("unknown rig key '" + c.key + "'", c.line);
    for (int i = 0; i < 5; ++i)
      if (c.key == keys[i]) has[i] = true;
  }
  const int line = block.line > 0 ? block.line : 1;
  if (!has[0] || !has[4]) throw ConfigError("rig needs fx and baseline", line);
  if (!has[1]) rig.fy = rig.fx;
  if (!has[2] || !has[3]) {
    if (width <= 0 || height <= 0) throw ConfigError("rig needs u0 and v0", line);
    if (!has[2]) rig.u0 = width / 2.0;
    if (!has[3]) rig.v0 = height / 2.0;
  }
  try {
    rig.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what(), line);
  }
  return rig;
}

template <typename F>
void for_fields(const Node& block, F&& on_field) {
  for (const auto& c : block.children) {
    if (!c.children.empty()) throw ConfigError("unexpected block in '" + block.key + "'", c.line);
    on_field(c);
  }
}

std::string fmt_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string fmt_vec(const Vec3& v) {
  return fmt_double(v.x) + " " + fmt_double(v.y) + " " + fmt_double(v.z);
}

}  // namespace

SceneSpec parse_scene(std::string_view text) {
  const Node root = parse_tree(text);
  SceneSpec scene;
  bool have_width = false, have_height = false;
  const Node* rig_block = nullptr;
  for (const auto& c : root.children) {
    if (c.key == "width") {
      scene.width = integer(c);
      have_width = true;
    } else if (c.key == "height") {
      scene.height = integer(c);
      have_height = true;
    } else if (c.key == "rig") {
      rig_block = &c;
    } else if (c.key == "sphere") {
      Sphere s;
      bool center = false, radius = false;
      for_fields(c, [&](const Node& f) {
        if (f.key == "center") s.center = vector3(f), center = true;
        else if (f.key == "radius") s.radius = scalar(f), radius = true;
        else throw ConfigError("unknown sphere key '" + f.key + "'", f.line);
      });
      if (!center || !radius) throw ConfigError("sphere needs center and radius", c.line);
      scene.primitives.emplace_back(s);
    } else if (c.key == "box") {
      Box b;
      bool lo = false, hi = false;
      for_fields(c, [&](const Node& f) {
        if (f.key == "min") b.min = vector3(f), lo = true;
        else if (f.key == "max") b.max = vector3(f), hi = true;
        else throw ConfigError("unknown box key '" + f.key + "'", f.line);
      });
      if (!lo || !hi) throw ConfigError("box needs min and max", c.line);
      scene.primitives.emplace_back(b);
    } else if (c.key == "plane") {
      Plane p;
      bool normal = false, offset = false;
      for_fields(c, [&](const Node& f) {
        if (f.key == "normal") p.normal = vector3(f), normal = true;
        else if (f.key == "offset") p.offset = scalar(f), offset = true;
        else throw ConfigError("unknown plane key '" + f.key + "'", f.line);
      });
      if (!normal || !offset) throw ConfigError("plane needs normal and offset", c.line);
      const double len = norm(p.normal);
      if (!(len > 0.0)) throw ConfigError("plane normal must be non-zero", c.line);
      p.normal = p.normal / len;
      p.offset /= len;
      scene.primitives.emplace_back(p);
    } else {
      throw ConfigError("unknown key '" + c.key + "'", c.line);
    }
  }
  if (!have_width || !have_height) throw ConfigError("scene needs width and height", 1);
  if (!rig_block) throw ConfigError("scene needs a rig block", 1);
  scene.rig = rig_from_block(*rig_block, scene.width, scene.height);
  try {
    scene.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what(), 1);
  }
  return scene;
}

std::string format_scene(const SceneSpec& scene) {
  std::ostringstream os;
  os << "width " << scene.width << "\nheight " << scene.height << "\n";
  os << "rig {\n";
  os << "  fx " << fmt_double(scene.rig.fx) << "\n  fy " << fmt_double(scene.rig.fy) << "\n";
  os << "  u0 " << fmt_double(scene.rig.u0) << "\n  v0 " << fmt_double(scene.rig.v0) << "\n";
  os << "  baseline " << fmt_double(scene.rig.baseline) << "\n}\n";
  for (const auto& prim : scene.primitives) {
    if (const auto* s = std::get_if<Sphere>(&prim)) {
      os << "sphere {\n  center " << fmt_vec(s->center) << "\n  radius " << fmt_double(s->radius) << "\n}\n";
    } else if (const auto* b = std::get_if<Box>(&prim)) {
      os << "box {\n  min " << fmt_vec(b->min) << "\n  max " << fmt_vec(b->max) << "\n}\n";
    } else if (const auto* p = std::get_if<Plane>(&prim)) {
      os << "plane {\n  normal " << fmt_vec(p->normal) << "\n  offset " << fmt_double(p->offset) << "\n}\n";
    }
  }
  return os.str();
}

StereoRig parse_rig(std::string_view text, int width, int height) {
  const Node root = parse_tree(text);
  const Node* block = &root;
  for (const auto& c : root.children)
    if (c.key == "rig") block = &c;
  return rig_from_block(*block, width, height);
}

std::string format_rig(const StereoRig& rig) {
  return "fx " + fmt_double(rig.fx) + "\nfy " + fmt_double(rig.fy) + "\nu0 " + fmt_double(rig.u0) +
         "\nv0 " + fmt_double(rig.v0) + "\nbaseline " + fmt_double(rig.baseline) + "\n";
}

}  // namespace stereonormal
