#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "veason/env.hpp"
#include "veason/grpo.hpp"
#include "veason/response.hpp"
#include "veason/rng.hpp"

namespace veason {

// One composite action: a keyframe choice, a box-center grid cell and a
// box-size bin.
struct ToyAction {
    int keyframe = 0;
    int cell = 0;
    int size_bin = 0;

    bool operator==(const ToyAction&) const = default;
};

std::string encode_action(const ToyAction& a);
ToyAction decode_action(const std::string& record);

struct ToyPolicyConfig {
    int frames = 8;
    int grid = 8;
    int size_bins = 4;
    int feature_dim = 0;
    double temperature = 1.0;

    int head_size(int head) const { return head == 0 ? frames : head == 1 ? grid * grid : size_bins; }
    int action_dims() const { return frames + grid * grid + size_bins; }
    std::size_t parameter_count() const {
        return static_cast<std::size_t>(action_dims()) * (feature_dim + 1);
    }
};

// Linear-softmax policy with three independent categorical heads over a flat
// feature vector. Parameters are one weight row plus bias per output logit,
// zero-initialized (uniform heads).
class ToyPolicy {
public:
    ToyPolicy() = default;
    explicit ToyPolicy(ToyPolicyConfig cfg)
        : cfg_(cfg), params_(cfg.parameter_count(), 0.0) {}

    const ToyPolicyConfig& config() const { return cfg_; }
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    // log-probabilities of one head given features
    std::vector<double> head_logprobs(int head, std::span<const double> features) const;

    ToyAction sample_action(std::span<const double> features, Rng& rng) const;
    ToyAction greedy_action(std::span<const double> features) const;

    // log pi(action | features); accumulates d logprob / d params into
    // grad_out when non-empty (grad_out is zeroed first).
    double action_logprob(std::span<const double> features, const ToyAction& a,
                          std::span<double> grad_out) const;

    // Exact KL(this || ref) at the given features, summed over heads.
    double kl_against(const ToyPolicy& ref, std::span<const double> features,
                      std::span<double> grad_out) const;

private:
    ToyPolicyConfig cfg_;
    std::vector<double> params_;
};

// The constant reasoning stub the toy policy emits; always parseable.
std::string_view toy_think_text();

// Decode an action into a structured response: keyframe index -> timestamp,
// cell/size bin -> one box clamped to the frame.
StructuredResponse action_to_response(const ToyAction& a, std::span<const double> sampled_times,
                                      const EnvConfig& cfg);

// Fraction of the frame side covered by each size bin.
double size_bin_fraction(int bin, int size_bins);

struct SampledAction {
    ToyAction action;
    std::string response_text;
    double logprob = 0;
};

// Sample G actions with their serialized responses and log-probabilities.
std::vector<SampledAction> sample_actions(const ToyPolicy& policy,
                                          std::span<const double> features,
                                          std::span<const double> sampled_times,
                                          const EnvConfig& cfg, int g, Rng& rng);

// Bridges ToyPolicy to the optimizer: resolves prompt ids to cached feature
// vectors and computes exact KL against a frozen reference.
class ToyPolicyAdapter final : public DifferentiablePolicy {
public:
    ToyPolicyAdapter(ToyPolicy& policy, const ToyPolicy& reference)
        : policy_(&policy), reference_(&reference) {}

    void set_features(const std::string& prompt_id, std::vector<double> features);
    const std::vector<double>& features(const std::string& prompt_id) const;

    std::size_t parameter_count() const override { return policy_->config().parameter_count(); }
    std::span<double> parameters() override { return policy_->parameters(); }
    double action_logprob(const std::string& prompt_id, const std::string& action,
                          std::span<double> grad_out) const override;
    std::optional<double> exact_kl(const std::string& prompt_id,
                                   std::span<double> grad_out) const override;

private:
    ToyPolicy* policy_;
    const ToyPolicy* reference_;
    std::unordered_map<std::string, std::vector<double>> features_;
};

void write_checkpoint(const ToyPolicy& policy, const std::filesystem::path& path);
ToyPolicy read_checkpoint(const std::filesystem::path& path);

}  // namespace veason
