#include "xview/align.hpp"
#include "xview/kdtree.hpp"
#include "xview/losses.hpp"
#include "xview/metrics.hpp"
#include "xview/pairing.hpp"
#include "xview/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace xview;

namespace {

std::vector<Vec3> random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = Vec3(u(rng), u(rng), u(rng));
  return out;
}

const SyntheticSample& sample() {
  static const SyntheticSample s = make_sample(SceneSpec::random_city(1), CaptureConfig{}, 1);
  return s;
}

}  // namespace

static void BM_RenderDepth(benchmark::State& state) {
  const SceneSpec scene = SceneSpec::random_city(2);
  const int w = static_cast<int>(state.range(0));
  const Intrinsics intr = Intrinsics::from_fov(70.0, w, w * 3 / 4);
  const Pose cam = Pose::from_center(rotation_from_ypr(30.0, 35.0, 0.0), Vec3(10.0, -60.0, -5.0));
  for (auto _ : state) benchmark::DoNotOptimize(render_depth(scene, cam, intr));
  state.SetItemsProcessed(state.iterations() * w * (w * 3 / 4));
}
BENCHMARK(BM_RenderDepth)->Arg(64)->Arg(128)->Arg(256);

static void BM_RenderOrtho(benchmark::State& state) {
  const SceneSpec scene = SceneSpec::random_city(3);
  const int w = static_cast<int>(state.range(0));
  const SatTile tile = SatTile::nadir(w, w, 300.0 / w, Vec3::Zero(), 150.0);
  for (auto _ : state) benchmark::DoNotOptimize(render_ortho(scene, tile));
  state.SetItemsProcessed(state.iterations() * w * w);
}
BENCHMARK(BM_RenderOrtho)->Arg(128)->Arg(256);

static void BM_KdTreeBuild(benchmark::State& state) {
  const auto pts = random_cloud(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(KdTree(pts));
}
BENCHMARK(BM_KdTreeBuild)->Arg(10000)->Arg(100000);

static void BM_NearestNeighbours(benchmark::State& state) {
  const auto gt = random_cloud(static_cast<std::size_t>(state.range(0)), 5);
  const auto pred = random_cloud(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(nn_distances(pred, gt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NearestNeighbours)->Arg(10000)->Arg(100000);

static void BM_OptimalScale(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 0.3);
  PointMap gt(side, side), pred(side, side);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt.points.data[i] = Vec3(n(rng) * 10, n(rng) * 10, 5.0 + std::abs(n(rng)) * 20);
    pred.points.data[i] = 0.5 * gt.points.data[i] + Vec3(n(rng), n(rng), n(rng));
    gt.valid.data[i] = pred.valid.data[i] = 1;
  }
  const auto w = depth_weights(gt);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_scale(pred, gt, w));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(gt.size()));
}
BENCHMARK(BM_OptimalScale)->Arg(64)->Arg(256);

static void BM_RegisterViews(benchmark::State& state) {
  const SyntheticSample& s = sample();
  std::vector<Projection> proj;
  for (const auto& v : s.meta.views) {
    proj.push_back(v.is_perspective() ? Projection::perspective : Projection::orthographic);
  }
  const int ref = s.meta.indices_of(Modality::satellite)[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(register_views(s.pointmaps, proj, s.correspondences, ref));
  }
}
BENCHMARK(BM_RegisterViews);

static void BM_MakeSample(benchmark::State& state) {
  const SceneSpec scene = SceneSpec::random_city(8);
  for (auto _ : state) benchmark::DoNotOptimize(make_sample(scene, CaptureConfig{}, 8));
}
BENCHMARK(BM_MakeSample)->Unit(benchmark::kMillisecond);

static void BM_SelectTuples(benchmark::State& state) {
  PairingViews v;
  std::uint64_t seed = 10;
  for (auto* list : {&v.satellite, &v.uav, &v.ground}) {
    for (int i = 0; i < 4; ++i) list->push_back(random_cloud(5000, seed++));
  }
  for (auto _ : state) benchmark::DoNotOptimize(select_tuples(v, 5, 2.0));
}
BENCHMARK(BM_SelectTuples)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
