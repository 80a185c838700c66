#include "veason/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "veason/errors.hpp"
#include "veason/rng.hpp"

namespace veason {

void TrainConfig::validate() const {
    if (batch_size < 1) throw ValidationError("train.batch must be >= 1");
    if (steps < 0) throw ValidationError("train.steps must be >= 0");
    if (epochs && *epochs < 1) throw ValidationError("train.epochs must be >= 1");
    if (steps == 0 && !epochs) throw ValidationError("train.steps or train.epochs must be set");
}

int TrainConfig::resolve_steps(std::size_t dataset_size) const {
    if (steps > 0) return steps;
    auto per_epoch = static_cast<int>((dataset_size + batch_size - 1) / batch_size);
    return *epochs * per_epoch;
}

namespace {

// Cyclic prompt iterator with a fresh seeded shuffle each pass.
class PromptSchedule {
public:
    PromptSchedule(std::size_t n, std::uint64_t seed) : order_(n), seed_(seed) { reshuffle(); }

    std::size_t next() {
        if (pos_ == order_.size()) {
            ++epoch_;
            reshuffle();
        }
        return order_[pos_++];
    }

private:
    void reshuffle() {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        Rng rng = Rng::stream(seed_, "order", epoch_);
        for (std::size_t i = order_.size(); i > 1; --i)
            std::swap(order_[i - 1], order_[rng.next_below(i)]);
        pos_ = 0;
    }

    std::vector<std::size_t> order_;
    std::uint64_t seed_;
    std::uint64_t epoch_ = 0;
    std::size_t pos_ = 0;
};

}  // namespace

TrainOutput train_policy(const Dataset& ds, const GrpoConfig& grpo_cfg,
                         const RewardWeights& weights, const MaskPropagator& propagator,
                         const TrainConfig& train_cfg, std::uint64_t seed) {
    if (ds.samples.empty()) throw ValidationError("train: dataset is empty");
    grpo_cfg.validate();
    train_cfg.validate();

    ToyPolicyConfig pc;
    pc.frames = ds.config.frames;
    pc.grid = ds.config.grid;
    pc.size_bins = ds.config.size_bins;
    pc.feature_dim = ds.config.frames * features_per_frame(ds.config);

    TrainOutput out;
    out.policy = ToyPolicy(pc);
    ToyPolicy reference = out.policy;  // frozen at initialization
    ToyPolicyAdapter adapter(out.policy, reference);

    std::vector<std::vector<double>> features(ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        features[i] = observe(ds, i);
        adapter.set_features(ds.samples[i].sample_id, features[i]);
    }

    int total_steps = train_cfg.resolve_steps(ds.samples.size());
    PromptSchedule schedule(ds.samples.size(), seed);

    for (int step_index = 0; step_index < total_steps; ++step_index) {
        std::vector<SampleGroup> groups;
        double sum_f = 0, sum_k = 0, sum_s = 0, sum_u = 0, sum_actions = 0;
        std::size_t n_responses = 0;

        for (int slot = 0; slot < train_cfg.batch_size; ++slot) {
            std::size_t idx = schedule.next();
            const Sample& sample = ds.samples[idx];
            Rng act_rng = Rng::stream(seed, "act",
                                      static_cast<std::uint64_t>(step_index) * train_cfg.batch_size +
                                          slot);
            std::vector<SampledAction> actions =
                sample_actions(out.policy, features[idx], sample.gt.sampled_times, ds.config,
                               grpo_cfg.group_size, act_rng);

            SampleGroup group;
            group.prompt_id = sample.sample_id;
            for (const SampledAction& a : actions) {
                RewardBreakdown r =
                    total_reward(a.response_text, sample.gt, sample.frames, weights, propagator);
                group.responses.push_back(encode_action(a.action));
                group.rewards.push_back(r.r_total);
                group.logprob_new.push_back(a.logprob);
                group.logprob_old.push_back(a.logprob);
                group.logprob_ref.push_back(
                    reference.action_logprob(features[idx], a.action, {}));
                sum_f += r.r_format;
                sum_k += r.r_temporal;
                sum_s += r.r_spatial;
                sum_u += r.r_unified;
                ParseResult parsed = parse_response(a.response_text);
                sum_actions += 1.0 + (parsed.ok() ? parsed.response->boxes.size() : 0);
                ++n_responses;
            }
            groups.push_back(std::move(group));
        }

        StepStats stats = step(adapter, groups, grpo_cfg);
        stats.step = step_index;
        stats.mean_r_format = sum_f / n_responses;
        stats.mean_r_temporal = sum_k / n_responses;
        stats.mean_r_spatial = sum_s / n_responses;
        stats.mean_r_unified = sum_u / n_responses;
        stats.mean_response_actions = sum_actions / n_responses;
        out.curve.push_back(stats);
    }
    return out;
}

MaskSequence infer_masks(const Dataset& ds, std::size_t sample_index, const ToyPolicy& policy,
                         const MaskPropagator& propagator) {
    const Sample& sample = ds.samples.at(sample_index);
    std::vector<double> features = observe(ds, sample_index);
    ToyAction action = policy.greedy_action(features);
    StructuredResponse response =
        action_to_response(action, sample.gt.sampled_times, ds.config);
    int keyframe = snap_timestamp(response.keyframe_timestamp, sample.gt.sampled_times);
    return propagator.propagate(response.boxes, sample.frames, keyframe);
}

}  // namespace veason
