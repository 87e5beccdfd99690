#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>

#include "stereonormal/affine_kernel.hpp"
#include "stereonormal/errors.hpp"
#include "stereonormal/evaluation.hpp"
#include "stereonormal/map_io.hpp"
#include "stereonormal/parallel.hpp"
#include "stereonormal/pipeline.hpp"
#include "stereonormal/synth.hpp"

namespace stereonormal::cli {

namespace fs = std::filesystem;

namespace {

std::string text_of(const fs::path& path) {
  const Bytes bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct RigFlags {
  std::string file;
  std::optional<double> fx, fy, u0, v0, baseline;

  void add_to(CLI::App& app) {
    app.add_option("--rig", file, "rig file (fx, fy, u0, v0, baseline)");
    app.add_option("--fx", fx, "focal length in pixels (x)");
    app.add_option("--fy", fy, "focal length in pixels (y)");
    app.add_option("--u0", u0, "principal point column");
    app.add_option("--v0", v0, "principal point row");
    app.add_option("--baseline", baseline, "stereo baseline");
  }

  // File values first, then flags; missing principal point -> image centre.
  StereoRig resolve(int width, int height) const {
    StereoRig rig;
    if (!file.empty()) {
      rig = parse_rig(text_of(file), width, height);
    } else {
      if (!fx || !baseline) throw ConfigError("need --rig or both --fx and --baseline", 0);
      rig.fx = *fx;
      rig.fy = fy.value_or(*fx);
      rig.u0 = width / 2.0;
      rig.v0 = height / 2.0;
      rig.baseline = *baseline;
    }
    if (fx) rig.fx = *fx;
    if (fy) rig.fy = *fy;
    if (u0) rig.u0 = *u0;
    if (v0) rig.v0 = *v0;
    if (baseline) rig.baseline = *baseline;
    rig.validate();
    return rig;
  }
};

struct DisparityInput {
  std::string path;
  double png_scale = 256.0;
  std::uint16_t png_invalid = 0;

  void add_to(CLI::App& app, bool required) {
    auto* opt = app.add_option("--disparity", path, "disparity map (.pfm or 16-bit .png)");
    if (required) opt->required();
    app.add_option("--png-scale", png_scale, "PNG16 disparity scale")->capture_default_str();
    app.add_option("--png-invalid", png_invalid, "PNG16 raw value marking missing pixels")
        ->capture_default_str();
  }

  ScalarField load() const {
    const Bytes bytes = read_file(path);
    std::string ext = fs::path(path).extension().string();
    for (auto& c : ext) c = char(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return read_disparity_png16(bytes, png_scale, png_invalid);
    return read_pfm(bytes);
  }
};

struct MethodFlags {
  std::string method = "affine-fixed";
  MethodConfig config;

  void add_to(CLI::App& app) {
    app.add_option("--method", method,
                   "affine-fixed | affine-adaptive-st | affine-adaptive-cd | pca | cross")
        ->capture_default_str();
    add_params(app);
  }

  void add_params(CLI::App& app) {
    app.add_option("--directions", config.directions, "star rays")->capture_default_str();
    app.add_option("--steps", config.max_steps, "maximum steps per ray")->capture_default_str();
    app.add_option("--threshold", config.threshold, "stop threshold (t for ST, k for CD)")
        ->capture_default_str();
    app.add_flag("--per-pixel-range", config.range_per_pixel,
                 "CD: compare the accumulated range of the whole star instead of each ray");
  }

  MethodConfig resolve(const std::string& name) const {
    const auto m = parse_method(name);
    if (!m) throw ArgumentError("unknown method '" + name + "'");
    MethodConfig c = config;
    c.method = *m;
    c.validate();
    return c;
  }
};

void apply_threads(int threads) {
  if (threads < 0) throw ArgumentError("--threads must be >= 0");
  set_thread_count(threads);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string scene;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  const SceneSpec scene = parse_scene(text_of(a.scene));
  const GroundTruth gt = raycast(scene);
  const ScalarField noisy = add_gaussian_noise(gt.disparity, a.sigma, a.seed);

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  write_file(dir / "depth.pfm", write_pfm(gt.depth));
  write_file(dir / "disparity.pfm", write_pfm(noisy));
  write_file(dir / "disparity_gt.pfm", write_pfm(gt.disparity));
  write_file(dir / "normals.pfm", write_normal_pfm(gt.normals));
  write_file(dir / "normals.png", write_normal_png(gt.normals));
  write_file(dir / "mask.png", write_mask_png(gt.disparity.mask(), scene.width, scene.height));
  write_text(dir / "rig.cfg", format_rig(scene.rig));

  out << "scene " << scene.width << "x" << scene.height << ", " << gt.disparity.valid_count()
      << " valid pixels, sigma " << a.sigma << ", seed " << a.seed << "\n";
  out << "wrote depth.pfm disparity.pfm disparity_gt.pfm normals.pfm normals.png mask.png rig.cfg to "
      << dir.string() << "\n";
  return kOk;
}

struct EstimateArgs {
  DisparityInput input;
  RigFlags rig;
  MethodFlags method;
  std::string out;
  std::string ply;
  bool ply_ascii = false;
  std::string png;
};

int run_estimate(const EstimateArgs& a, std::ostream& out) {
  const MethodConfig cfg = a.method.resolve(a.method.method);
  const ScalarField disp = a.input.load();
  const StereoRig rig = a.rig.resolve(disp.width(), disp.height());
  const NormalField normals = estimate_normals(disp, rig, cfg);

  write_file(a.out, write_normal_pfm(normals));
  if (!a.png.empty()) write_file(a.png, write_normal_png(normals));
  std::size_t points = 0;
  if (!a.ply.empty()) {
    const auto cloud = oriented_cloud(disp, normals, rig);
    points = cloud.size();
    write_file(a.ply, write_ply_oriented(cloud, !a.ply_ascii));
  }
  out << cfg.label() << ": " << normals.valid_count() << " of " << disp.valid_count()
      << " disparity pixels got a normal\n";
  if (!a.ply.empty()) out << "point cloud: " << points << " oriented points\n";
  return kOk;
}

struct EvalArgs {
  std::string est;
  std::string gt;
  std::string mask;
  std::string label = "estimate";
  std::string json;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const NormalField est = read_normal_pfm(read_file(a.est));
  const NormalField gt = read_normal_pfm(read_file(a.gt));
  std::vector<std::uint8_t> region;
  if (!a.mask.empty()) {
    const Image8 img = read_png8(read_file(a.mask));
    if (img.width != gt.width() || img.height != gt.height()) {
      throw ArgumentError("mask size does not match the normal maps");
    }
    region.resize(std::size_t(img.width) * std::size_t(img.height));
    for (std::size_t i = 0; i < region.size(); ++i) {
      region[i] = img.pixels[i * std::size_t(img.channels)] != 0;
    }
  }
  const ErrorStats stats = evaluate(est, gt, region);
  out << compare_table({{a.label, stats}}).text;
  if (!a.json.empty()) {
    nlohmann::json config = {{"est", a.est}, {"gt", a.gt}};
    if (!a.mask.empty()) config["mask"] = a.mask;
    write_file(a.json, write_stats_json(stats, a.label, config));
  }
  return kOk;
}

struct BenchArgs {
  DisparityInput input;
  RigFlags rig;
  MethodFlags method;
  std::vector<std::string> methods;
  std::vector<int> kernels;
  std::string scene;
  int width = 1024;
  int height = 1024;
  double sigma = 0.2;
  std::uint64_t seed = 7;
  int repeat = 100;
  int warmup = 3;
  std::string json;
};

int run_bench(const BenchArgs& a, std::ostream& out) {
  if (!a.input.path.empty() && !a.scene.empty()) {
    throw ArgumentError("--disparity and --scene are mutually exclusive");
  }
  ScalarField disp;
  StereoRig rig;
  std::string source;
  if (!a.input.path.empty()) {
    disp = a.input.load();
    rig = a.rig.resolve(disp.width(), disp.height());
    source = a.input.path;
  } else {
    const SceneSpec scene =
        a.scene.empty() ? sphere_benchmark_scene(a.width, a.height) : parse_scene(text_of(a.scene));
    rig = scene.rig;
    disp = add_gaussian_noise(raycast(scene).disparity, a.sigma, a.seed);
    source = a.scene.empty() ? "built-in sphere" : a.scene;
  }

  std::vector<MethodConfig> runs;
  const std::vector<std::string> names = a.methods.empty() ? std::vector<std::string>{"affine-fixed"} : a.methods;
  const std::vector<int> sizes = a.kernels.empty() ? std::vector<int>{9} : a.kernels;
  for (const auto& name : names) {
    MethodConfig c = a.method.resolve(name);
    if (c.method == Method::affine_fixed || c.method == Method::pca) {
      for (int k : sizes) {
        c.kernel = k;
        c.validate();
        runs.push_back(c);
      }
    } else {
      runs.push_back(c);
    }
  }

  out << "input " << source << " (" << disp.width() << "x" << disp.height() << "), threads "
      << thread_count() << ", " << a.repeat << " frames after " << a.warmup << " warm-up\n";
  out << std::left << std::setw(22) << "method" << std::right << std::setw(11) << "avg ms" << std::setw(11)
      << "min ms" << std::setw(11) << "max ms" << std::setw(11) << "std ms" << "\n";
  nlohmann::json records = nlohmann::json::array();
  for (const auto& c : runs) {
    const FrameTimes t = time_estimation(disp, rig, c, a.repeat, a.warmup);
    out << std::left << std::setw(22) << c.label() << std::right << std::fixed << std::setprecision(3)
        << std::setw(11) << t.avg << std::setw(11) << t.min << std::setw(11) << t.max << std::setw(11) << t.std
        << "\n";
    out.unsetf(std::ios::fixed);
    records.push_back({{"label", c.label()},
                       {"method", std::string(method_name(c.method))},
                       {"width", disp.width()},
                       {"height", disp.height()},
                       {"threads", thread_count()},
                       {"repeats", a.repeat},
                       {"avg_ms", t.avg},
                       {"min_ms", t.min},
                       {"max_ms", t.max},
                       {"std_ms", t.std}});
  }
  if (!a.json.empty()) write_text(a.json, records.dump(2) + "\n");
  return kOk;
}

struct KernelArgs {
  int size = 0;
  std::string offsets;
};

std::vector<Offset> parse_offsets(const std::string& text) {
  // "dx,dy dx,dy ..." with spaces or semicolons between pairs.
  std::string s = text;
  for (auto& c : s)
    if (c == ';') c = ' ';
  std::istringstream in(s);
  std::vector<Offset> offsets;
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    if (comma == std::string::npos) throw ArgumentError("offset '" + pair + "' must be dx,dy");
    try {
      std::size_t used_x = 0, used_y = 0;
      const std::string xs = pair.substr(0, comma), ys = pair.substr(comma + 1);
      const int dx = std::stoi(xs, &used_x);
      const int dy = std::stoi(ys, &used_y);
      if (used_x != xs.size() || used_y != ys.size()) throw std::invalid_argument("trailing");
      offsets.push_back({dx, dy});
    } catch (const std::logic_error&) {
      throw ArgumentError("offset '" + pair + "' must be two integers");
    }
  }
  if (offsets.empty()) throw ArgumentError("no offsets given");
  return offsets;
}

int run_kernel(const KernelArgs& a, std::ostream& out) {
  if ((a.size != 0) == !a.offsets.empty()) throw ArgumentError("give exactly one of --size and --offsets");
  KernelSpec spec = a.size != 0 ? KernelSpec::square(a.size) : KernelSpec{parse_offsets(a.offsets)};
  out << format_kernels(build_kernels(spec));
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Surface normals from rectified stereo disparity maps", "stereonormal"};
  app.require_subcommand(1);
  int threads = default_thread_count();
  app.add_option("--threads", threads, "worker threads (default: STEREONORMAL_THREADS or all cores)");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "render a scene file to ground-truth maps");
  s->fallthrough();
  s->add_option("--scene", synth.scene, "scene file")->required();
  s->add_option("--sigma", synth.sigma, "disparity noise standard deviation")->capture_default_str();
  s->add_option("--seed", synth.seed, "noise seed")->capture_default_str();
  s->add_option("--out", synth.out, "output directory")->required();

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "estimate a normal map from a disparity map");
  e->fallthrough();
  est.input.add_to(*e, true);
  est.rig.add_to(*e);
  est.method.add_to(*e);
  e->add_option("--kernel", est.method.config.kernel, "window width for affine-fixed and pca")
      ->capture_default_str();
  e->add_option("--out", est.out, "normal map (.pfm)")->required();
  e->add_option("--ply", est.ply, "oriented point cloud");
  e->add_flag("--ply-ascii", est.ply_ascii, "write the point cloud as ASCII instead of binary");
  e->add_option("--png", est.png, "normal map visualization (.png)");

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "angular error statistics of an estimate against ground truth");
  v->fallthrough();
  v->add_option("--est", ev.est, "estimated normals (.pfm)")->required();
  v->add_option("--gt", ev.gt, "ground-truth normals (.pfm)")->required();
  v->add_option("--mask", ev.mask, "optional PNG; nonzero pixels are evaluated");
  v->add_option("--label", ev.label, "row label")->capture_default_str();
  v->add_option("--json", ev.json, "write statistics as JSON");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "time repeated estimations (file I/O excluded)");
  b->fallthrough();
  bench.input.add_to(*b, false);
  bench.rig.add_to(*b);
  bench.method.add_params(*b);
  b->add_option("--method", bench.methods, "methods to time (repeatable)");
  b->add_option("--kernel", bench.kernels, "window widths for affine-fixed and pca (repeatable)");
  b->add_option("--scene", bench.scene, "scene file rendered as input");
  b->add_option("--width", bench.width, "built-in sphere width")->capture_default_str();
  b->add_option("--height", bench.height, "built-in sphere height")->capture_default_str();
  b->add_option("--sigma", bench.sigma, "noise added to rendered input")->capture_default_str();
  b->add_option("--seed", bench.seed, "noise seed")->capture_default_str();
  b->add_option("--repeat", bench.repeat, "timed frames")->capture_default_str();
  b->add_option("--warmup", bench.warmup, "untimed frames")->capture_default_str();
  b->add_option("--json", bench.json, "write timings as JSON");

  KernelArgs kern;
  auto* k = app.add_subcommand("kernel", "print precomputed least-squares kernels");
  k->fallthrough();
  k->add_option("--size", kern.size, "square window width");
  k->add_option("--offsets", kern.offsets, "explicit offsets \"dx,dy dx,dy ...\"");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  if (args.empty()) argv.push_back("stereonormal");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    apply_threads(threads);
    if (s->parsed()) return run_synth(synth, out);
    if (e->parsed()) return run_estimate(est, out);
    if (v->parsed()) return run_eval(ev, out);
    if (b->parsed()) return run_bench(bench, out);
    if (k->parsed()) return run_kernel(kern, out);
    err << "error: no subcommand\n";
    return kUsage;
  } catch (const IoError& ex) {
    err << "io error: " << ex.what() << "\n";
    return kIo;
  } catch (const FormatError& ex) {
    err << "format error: " << ex.what() << "\n";
    return kFormat;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfig;
  } catch (const ArgumentError& ex) {
    err << "invalid parameter: " << ex.what() << "\n";
    return kConfig;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kInternal;
  }
}

}  // namespace stereonormal::cli
