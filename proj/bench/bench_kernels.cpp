// Parallel estimators against their serial references on a noisy sphere.
// Arguments: kernel width (where applicable) and worker thread count.

#include <benchmark/benchmark.h>

#include "stereonormal/adaptive_region.hpp"
#include "stereonormal/affine_kernel.hpp"
#include "stereonormal/baselines.hpp"
#include "stereonormal/parallel.hpp"
#include "stereonormal/reference.hpp"
#include "stereonormal/synth.hpp"

namespace sn = stereonormal;

namespace {

struct Input {
  sn::SceneSpec scene;
  sn::ScalarField disparity;
};

const Input& input() {
  static const Input in = [] {
    Input i;
    i.scene = sn::sphere_benchmark_scene(640, 480);
    i.disparity = sn::add_gaussian_noise(sn::raycast(i.scene).disparity, 0.2, 7);
    return i;
  }();
  return in;
}

void set_pixels(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * std::int64_t(input().disparity.size()));
  state.counters["threads"] = sn::thread_count();
}

void BM_ConvolveAffine(benchmark::State& state) {
  sn::set_thread_count(int(state.range(1)));
  const auto kernels = sn::build_kernels(sn::KernelSpec::square(int(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(sn::convolve_affine(input().disparity, kernels));
  set_pixels(state);
}

void BM_DirectAffineSerial(benchmark::State& state) {
  sn::set_thread_count(1);
  const auto spec = sn::KernelSpec::square(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sn::reference::affine_field_direct(input().disparity, spec));
  set_pixels(state);
}

void BM_FixedNormals(benchmark::State& state) {
  sn::set_thread_count(int(state.range(1)));
  const auto kernels = sn::build_kernels(sn::KernelSpec::square(int(state.range(0))));
  for (auto _ : state)
    benchmark::DoNotOptimize(sn::estimate_normals_fixed(input().disparity, input().scene.rig, kernels));
  set_pixels(state);
}

void BM_FixedNormalsSerial(benchmark::State& state) {
  sn::set_thread_count(1);
  const auto spec = sn::KernelSpec::square(int(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(sn::reference::normals_fixed(input().disparity, input().scene.rig, spec));
  set_pixels(state);
}

sn::StarConfig star(std::int64_t rule) {
  sn::StarConfig c;
  c.rule = rule == 0 ? sn::StopRule::simple_threshold : sn::StopRule::covered_depth;
  return c;
}

void BM_AdaptiveNormals(benchmark::State& state) {
  sn::set_thread_count(int(state.range(1)));
  const auto cfg = star(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sn::estimate_normals_adaptive(input().disparity, input().scene.rig, cfg));
  set_pixels(state);
}

void BM_AdaptiveAffineSerial(benchmark::State& state) {
  sn::set_thread_count(1);
  const auto cfg = star(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sn::reference::affine_field_adaptive(input().disparity, input().scene.rig, cfg));
  set_pixels(state);
}

void BM_PcaNormals(benchmark::State& state) {
  sn::set_thread_count(int(state.range(1)));
  const int window = int(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sn::estimate_normals_pca(input().disparity, input().scene.rig, window));
  set_pixels(state);
}

void sizes_and_threads(benchmark::internal::Benchmark* b) {
  for (int k : {3, 5, 9, 15})
    for (int t : {1, 2, 4}) b->Args({k, t});
}

void rules_and_threads(benchmark::internal::Benchmark* b) {
  for (int rule : {0, 1})
    for (int t : {1, 2, 4}) b->Args({rule, t});
}

}  // namespace

BENCHMARK(BM_ConvolveAffine)
    ->Apply(sizes_and_threads)
    ->ArgNames({"kernel", "threads"})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_DirectAffineSerial)
    ->DenseRange(3, 9, 6)
    ->ArgName("kernel")
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_FixedNormals)
    ->Apply(sizes_and_threads)
    ->ArgNames({"kernel", "threads"})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_FixedNormalsSerial)
    ->DenseRange(3, 9, 6)
    ->ArgName("kernel")
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_AdaptiveNormals)
    ->Apply(rules_and_threads)
    ->ArgNames({"st0_cd1", "threads"})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_AdaptiveAffineSerial)
    ->DenseRange(0, 1)
    ->ArgName("st0_cd1")
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_PcaNormals)
    ->Apply(sizes_and_threads)
    ->ArgNames({"window", "threads"})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
