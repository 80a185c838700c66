#pragma once

#include <cstdint>
#include <vector>

#include "veason/env.hpp"
#include "veason/grpo.hpp"
#include "veason/policy.hpp"

namespace veason {

struct TrainConfig {
    int batch_size = 16;
    int steps = 300;
    std::optional<int> epochs;  // when set and steps == 0, steps = epochs * ceil(n / batch)

    void validate() const;
    int resolve_steps(std::size_t dataset_size) const;
};

struct TrainOutput {
    ToyPolicy policy;
    std::vector<StepStats> curve;
};

// GRPO training of the toy policy against the dataset: per step, sample G
// responses per prompt, score them, normalize advantages within each group
// and ascend the KL-regularized objective. Deterministic given the seed.
TrainOutput train_policy(const Dataset& ds, const GrpoConfig& grpo_cfg,
                         const RewardWeights& weights, const MaskPropagator& propagator,
                         const TrainConfig& train_cfg, std::uint64_t seed);

// Greedy decode for one sample followed by propagation of the predicted boxes.
MaskSequence infer_masks(const Dataset& ds, std::size_t sample_index, const ToyPolicy& policy,
                         const MaskPropagator& propagator);

}  // namespace veason
