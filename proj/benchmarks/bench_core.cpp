#include <benchmark/benchmark.h>

#include "veason/env.hpp"
#include "veason/grpo.hpp"
#include "veason/policy.hpp"
#include "veason/rewards.hpp"
#include "veason/rng.hpp"
#include "veason/train.hpp"

using namespace veason;

namespace {

BinaryMask random_mask(Rng& rng, int side, double density) {
    BinaryMask m(side, side);
    for (auto& b : m.bits) b = rng.next_double() < density ? 1 : 0;
    return m;
}

void BM_MaskIou(benchmark::State& state) {
    Rng rng(1);
    BinaryMask a = random_mask(rng, 64, 0.3), b = random_mask(rng, 64, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(mask_iou(a, b));
}
BENCHMARK(BM_MaskIou);

void BM_RleRoundTrip(benchmark::State& state) {
    Rng rng(2);
    BinaryMask m = random_mask(rng, 64, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(rle_decode(rle_encode(m)));
}
BENCHMARK(BM_RleRoundTrip);

void BM_BoundaryFscore(benchmark::State& state) {
    Rng rng(3);
    BinaryMask a = box_to_mask({10, 10, 40, 40}, 64, 64);
    BinaryMask b = box_to_mask({12, 11, 43, 40}, 64, 64);
    for (auto _ : state) benchmark::DoNotOptimize(boundary_fscore(a, b, 1));
}
BENCHMARK(BM_BoundaryFscore);

void BM_Hungarian(benchmark::State& state) {
    Rng rng(4);
    int n = static_cast<int>(state.range(0));
    Matrix m(n, n);
    for (double& v : m.values) v = rng.next_double();
    for (auto _ : state) benchmark::DoNotOptimize(hungarian(m));
}
BENCHMARK(BM_Hungarian)->Arg(4)->Arg(8)->Arg(16);

void BM_Advantages(benchmark::State& state) {
    Rng rng(5);
    std::vector<double> rewards(8);
    for (double& r : rewards) r = rng.next_range(0, 4);
    for (auto _ : state) benchmark::DoNotOptimize(advantages(rewards, 1e-6));
}
BENCHMARK(BM_Advantages);

void BM_TotalReward(benchmark::State& state) {
    EnvConfig cfg;
    cfg.n_videos = 1;
    cfg.negative_fraction = 0;
    Dataset ds = generate_dataset(11, cfg);
    const Sample& s = ds.samples[0];
    std::string text = serialize_response(canonical_ground_truth_response(s));
    LabelMapPropagator propagator;
    RewardWeights weights;
    for (auto _ : state)
        benchmark::DoNotOptimize(total_reward(text, s.gt, s.frames, weights, propagator));
}
BENCHMARK(BM_TotalReward);

void BM_TrainStep(benchmark::State& state) {
    EnvConfig cfg;
    cfg.n_videos = 16;
    Dataset ds = generate_dataset(12, cfg);
    GrpoConfig gc;
    TrainConfig tc;
    tc.batch_size = 16;
    tc.steps = 1;
    LabelMapPropagator propagator;
    for (auto _ : state)
        benchmark::DoNotOptimize(train_policy(ds, gc, RewardWeights{}, propagator, tc, 13));
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
