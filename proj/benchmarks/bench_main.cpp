#include <benchmark/benchmark.h>

#include "lgp/attack_loop.hpp"
#include "lgp/geometry.hpp"
#include "lgp/random.hpp"
#include "lgp/scene.hpp"
#include "lgp/toy_detector.hpp"

namespace {

using namespace lgp;

void BM_ToyForward(benchmark::State& state) {
  ToyDetector det;
  auto [img, gts] = render_scene(random_scene(1));
  for (auto _ : state) benchmark::DoNotOptimize(det.detect_raw(img));
}
BENCHMARK(BM_ToyForward)->Unit(benchmark::kMillisecond);

void BM_ToyBackward(benchmark::State& state) {
  ToyDetector det;
  auto [img, gts] = render_scene(random_scene(1));
  const auto props = det.detect_raw(img);
  std::vector<ProposalGrad> grads(props.size());
  for (auto& g : grads) {
    g.w = 1.0;
    g.logits.assign(props[0].logits.size(), 0.5);
  }
  for (auto _ : state) benchmark::DoNotOptimize(det.backward(img, grads));
}
BENCHMARK(BM_ToyBackward)->Unit(benchmark::kMillisecond);

void BM_ObbIou(benchmark::State& state) {
  Rng rng(3);
  std::vector<Box> boxes;
  for (int i = 0; i < 256; ++i) {
    boxes.push_back(make_obb(rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(2, 8), rng.uniform(2, 8),
                             rng.uniform(-1.5, 1.5)));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(boxes[i % 256], boxes[(i * 7 + 3) % 256]));
    ++i;
  }
}
BENCHMARK(BM_ObbIou);

void BM_Nms(benchmark::State& state) {
  Rng rng(4);
  std::vector<ScoredBox> boxes;
  for (int i = 0; i < state.range(0); ++i) {
    boxes.push_back({make_hbb(rng.uniform(0, 128), rng.uniform(0, 128), rng.uniform(8, 32), rng.uniform(8, 32)),
                     rng.uniform()});
  }
  for (auto _ : state) benchmark::DoNotOptimize(nms(boxes, 0.5));
}
BENCHMARK(BM_Nms)->Arg(64)->Arg(256)->Arg(1024);

// One optimizer step of the full attack on a 128x128 scene.
void BM_AttackIteration(benchmark::State& state) {
  ToyDetector det;
  auto [img, gts] = render_scene(random_scene(2));
  AttackConfig cfg;
  cfg.max_iters = 1;
  for (auto _ : state) benchmark::DoNotOptimize(lgp_attack(det, img, gts, cfg));
}
BENCHMARK(BM_AttackIteration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
