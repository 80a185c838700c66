#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace veason {

struct GrpoConfig {
    int group_size = 8;
    double beta = 5e-3;
    double learning_rate = 0.5;
    double epsilon_std = 1e-6;
    std::optional<double> clip_range;
    double max_grad_norm = 1.0;

    void validate() const;
};

// Group-relative advantages: z-scores with population (divide-by-G) standard
// deviation and epsilon_std added to the denominator. A zero-variance group
// yields an exactly zero vector. Requires G >= 2.
std::vector<double> advantages(std::span<const double> rewards, double epsilon_std);

// G candidate responses for one prompt. `responses` are opaque action records
// a DifferentiablePolicy can evaluate; all lists have length G.
struct SampleGroup {
    std::string prompt_id;
    std::vector<std::string> responses;
    std::vector<double> rewards;
    std::vector<double> logprob_new;
    std::vector<double> logprob_old;
    std::vector<double> logprob_ref;

    void validate() const;
};

// Unbiased estimator of KL(pi_theta || pi_ref) from per-response sequence
// log-probabilities: mean of exp(d) - d - 1 with d = lp_ref - lp_new.
double kl_estimate(std::span<const double> logprob_new, std::span<const double> logprob_ref);

// Objective value for one group from the stored log-probabilities:
// sum_i ratio_i * A_i - beta * KL, pessimistically clipped when clip_range is
// set. KL is exact_kl when given, the group estimator otherwise.
double grpo_objective(const SampleGroup& group, const GrpoConfig& cfg,
                      std::optional<double> exact_kl = std::nullopt);

// What the optimizer needs from a policy: a flat parameter vector, action
// log-probabilities with gradients, and (when tractable) exact KL against the
// frozen reference.
class DifferentiablePolicy {
public:
    virtual ~DifferentiablePolicy() = default;

    virtual std::size_t parameter_count() const = 0;
    virtual std::span<double> parameters() = 0;

    // log pi_theta(action | prompt); fills grad_out (d logprob / d theta)
    // when it is non-empty.
    virtual double action_logprob(const std::string& prompt_id, const std::string& action,
                                  std::span<double> grad_out) const = 0;

    // Exact KL(pi_theta || pi_ref) at this prompt, with gradient when
    // grad_out is non-empty; nullopt if the policy cannot compute it.
    virtual std::optional<double> exact_kl(const std::string& prompt_id,
                                           std::span<double> grad_out) const = 0;
};

struct ObjectiveEval {
    double value = 0;
    double kl = 0;
    std::vector<double> gradient;
};

// Objective and gradient for one group at the policy's current parameters.
// logprob_new is re-evaluated through the policy; logprob_old is taken from
// the group as recorded at sampling time.
ObjectiveEval group_objective(const DifferentiablePolicy& policy, const SampleGroup& group,
                              const GrpoConfig& cfg, bool want_gradient);

struct StepStats {
    int step = 0;
    double mean_reward = 0;
    double mean_r_format = 0;
    double mean_r_temporal = 0;
    double mean_r_spatial = 0;
    double mean_r_unified = 0;
    double kl = 0;
    double grad_norm = 0;
    double mean_response_actions = 0;
};

// One ascent step on the batch-mean objective with global gradient-norm
// clipping. Fills step/mean_reward/kl/grad_norm; the caller owns the rest.
StepStats step(DifferentiablePolicy& policy, std::span<const SampleGroup> batch,
               const GrpoConfig& cfg);

// CSV with one row per step:
// step,mean_reward,mean_r_f,mean_r_k,mean_r_s,mean_r_u,kl,grad_norm,mean_response_actions
void write_curves_csv(const std::filesystem::path& path, std::span<const StepStats> stats);
std::vector<StepStats> read_curves_csv(const std::filesystem::path& path);

}  // namespace veason
