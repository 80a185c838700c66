#include "veason/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "veason/errors.hpp"

namespace veason {

void GrpoConfig::validate() const {
    if (group_size < 2) throw ValidationError("grpo.group_size must be >= 2");
    if (!(beta >= 0)) throw ValidationError("grpo.beta must be >= 0");
    if (!(epsilon_std > 0)) throw ValidationError("grpo.epsilon_std must be > 0");
    if (!std::isfinite(learning_rate)) throw ValidationError("grpo.learning_rate must be finite");
    if (clip_range && !(*clip_range > 0)) throw ValidationError("grpo.clip_range must be > 0");
    if (!(max_grad_norm > 0)) throw ValidationError("grpo.max_grad_norm must be > 0");
}

std::vector<double> advantages(std::span<const double> rewards, double epsilon_std) {
    std::size_t g = rewards.size();
    if (g < 2) throw ValidationError("advantages: group size must be >= 2");
    bool all_equal = true;
    double mean = 0;
    for (double r : rewards) {
        if (!std::isfinite(r)) throw ValidationError("advantages: rewards must be finite");
        all_equal &= r == rewards[0];
        mean += r;
    }
    std::vector<double> out(g, 0.0);
    if (all_equal) return out;  // zero-variance group, exact even when sum/g rounds
    mean /= static_cast<double>(g);
    double var = 0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(g);
    double std_dev = std::sqrt(var);
    if (std_dev == 0.0) return out;
    for (std::size_t i = 0; i < g; ++i) out[i] = (rewards[i] - mean) / (std_dev + epsilon_std);
    return out;
}

void SampleGroup::validate() const {
    std::size_t g = responses.size();
    if (g < 2) throw ValidationError("SampleGroup: group size must be >= 2");
    if (rewards.size() != g || logprob_new.size() != g || logprob_old.size() != g ||
        logprob_ref.size() != g)
        throw ValidationError("SampleGroup: list lengths do not match group size");
    for (std::size_t i = 0; i < g; ++i) {
        if (!std::isfinite(logprob_new[i]) || !std::isfinite(logprob_old[i]) ||
            !std::isfinite(logprob_ref[i]))
            throw ValidationError("SampleGroup: log-probabilities must be finite");
    }
}

double kl_estimate(std::span<const double> logprob_new, std::span<const double> logprob_ref) {
    if (logprob_new.size() != logprob_ref.size() || logprob_new.empty())
        throw ValidationError("kl_estimate: mismatched or empty inputs");
    double sum = 0;
    for (std::size_t i = 0; i < logprob_new.size(); ++i) {
        double d = logprob_ref[i] - logprob_new[i];
        sum += std::exp(d) - d - 1.0;
    }
    return sum / static_cast<double>(logprob_new.size());
}

namespace {

// Pessimistic PPO-style term for one response; when clipping is off this is
// just ratio * advantage.
double clipped_term(double ratio, double advantage, const std::optional<double>& clip_range,
                    bool& unclipped_active) {
    double raw = ratio * advantage;
    unclipped_active = true;
    if (!clip_range) return raw;
    double clipped = std::clamp(ratio, 1.0 - *clip_range, 1.0 + *clip_range) * advantage;
    if (raw <= clipped) return raw;
    unclipped_active = false;
    return clipped;
}

}  // namespace

double grpo_objective(const SampleGroup& group, const GrpoConfig& cfg,
                      std::optional<double> exact_kl) {
    group.validate();
    std::vector<double> adv = advantages(group.rewards, cfg.epsilon_std);
    double sum = 0;
    for (std::size_t i = 0; i < adv.size(); ++i) {
        double ratio = std::exp(group.logprob_new[i] - group.logprob_old[i]);
        if (!std::isfinite(ratio))
            throw NumericalError("grpo_objective: non-finite ratio for response " +
                                 std::to_string(i) + " of prompt " + group.prompt_id);
        bool active = false;
        sum += clipped_term(ratio, adv[i], cfg.clip_range, active);
    }
    double kl = exact_kl ? *exact_kl : kl_estimate(group.logprob_new, group.logprob_ref);
    return sum - cfg.beta * kl;
}

ObjectiveEval group_objective(const DifferentiablePolicy& policy, const SampleGroup& group,
                              const GrpoConfig& cfg, bool want_gradient) {
    group.validate();
    std::size_t p = policy.parameter_count();
    ObjectiveEval out;
    if (want_gradient) out.gradient.assign(p, 0.0);
    std::vector<double> adv = advantages(group.rewards, cfg.epsilon_std);
    std::vector<double> grad_buf(want_gradient ? p : 0);
    std::vector<double> lp_new(group.responses.size());

    double sum = 0;
    for (std::size_t i = 0; i < group.responses.size(); ++i) {
        lp_new[i] = policy.action_logprob(group.prompt_id, group.responses[i],
                                          want_gradient ? std::span<double>(grad_buf)
                                                        : std::span<double>());
        double ratio = std::exp(lp_new[i] - group.logprob_old[i]);
        if (!std::isfinite(ratio))
            throw NumericalError("group_objective: non-finite ratio for response " +
                                 std::to_string(i) + " of prompt " + group.prompt_id);
        bool active = false;
        sum += clipped_term(ratio, adv[i], cfg.clip_range, active);
        if (want_gradient && active) {
            double w = ratio * adv[i];
            for (std::size_t k = 0; k < p; ++k) out.gradient[k] += w * grad_buf[k];
        }
    }

    std::vector<double> kl_grad(want_gradient ? p : 0);
    std::optional<double> exact =
        policy.exact_kl(group.prompt_id, want_gradient ? std::span<double>(kl_grad)
                                                       : std::span<double>());
    if (exact) {
        out.kl = *exact;
        if (want_gradient)
            for (std::size_t k = 0; k < p; ++k) out.gradient[k] -= cfg.beta * kl_grad[k];
    } else {
        // Estimator fallback; d/dtheta [exp(d) - d - 1] = (1 - exp(d)) dlp_new
        // with d = lp_ref - lp_new.
        out.kl = kl_estimate(lp_new, group.logprob_ref);
        if (want_gradient) {
            double scale = cfg.beta / static_cast<double>(group.responses.size());
            for (std::size_t i = 0; i < group.responses.size(); ++i) {
                policy.action_logprob(group.prompt_id, group.responses[i], grad_buf);
                double d = group.logprob_ref[i] - lp_new[i];
                double w = scale * (1.0 - std::exp(d));
                for (std::size_t k = 0; k < p; ++k) out.gradient[k] -= w * grad_buf[k];
            }
        }
    }
    out.value = sum - cfg.beta * out.kl;
    return out;
}

StepStats step(DifferentiablePolicy& policy, std::span<const SampleGroup> batch,
               const GrpoConfig& cfg) {
    if (batch.empty()) throw ValidationError("step: batch is empty");
    cfg.validate();
    std::size_t p = policy.parameter_count();
    std::vector<double> grad(p, 0.0);
    double kl_sum = 0, reward_sum = 0;
    std::size_t n_rewards = 0;

    for (const SampleGroup& group : batch) {
        ObjectiveEval eval = group_objective(policy, group, cfg, true);
        for (std::size_t k = 0; k < p; ++k) grad[k] += eval.gradient[k] / batch.size();
        kl_sum += eval.kl;
        for (double r : group.rewards) reward_sum += r;
        n_rewards += group.rewards.size();
    }

    double norm_sq = 0;
    for (double g : grad) norm_sq += g * g;
    double norm = std::sqrt(norm_sq);
    if (!std::isfinite(norm)) throw NumericalError("step: non-finite gradient, step aborted");
    double scale = norm > cfg.max_grad_norm ? cfg.max_grad_norm / norm : 1.0;

    std::span<double> params = policy.parameters();
    for (std::size_t k = 0; k < p; ++k) params[k] += cfg.learning_rate * scale * grad[k];
    for (double v : params)
        if (!std::isfinite(v)) throw NumericalError("step: parameters became non-finite");

    StepStats stats;
    stats.mean_reward = reward_sum / static_cast<double>(n_rewards);
    stats.kl = kl_sum / static_cast<double>(batch.size());
    stats.grad_norm = norm;
    return stats;
}

void write_curves_csv(const std::filesystem::path& path, std::span<const StepStats> stats) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "step,mean_reward,mean_r_f,mean_r_k,mean_r_s,mean_r_u,kl,grad_norm,"
           "mean_response_actions\n";
    char buf[512];
    for (const StepStats& s : stats) {
        std::snprintf(buf, sizeof buf,
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.step,
                      s.mean_reward, s.mean_r_format, s.mean_r_temporal, s.mean_r_spatial,
                      s.mean_r_unified, s.kl, s.grad_norm, s.mean_response_actions);
        out << buf;
    }
}

std::vector<StepStats> read_curves_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("curves csv: empty file");
    if (line != "step,mean_reward,mean_r_f,mean_r_k,mean_r_s,mean_r_u,kl,grad_norm,"
                "mean_response_actions")
        throw ValidationError("curves csv: unexpected header");
    std::vector<StepStats> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        StepStats s;
        std::istringstream row(line);
        std::string field;
        double* fields[] = {nullptr,          &s.mean_reward, &s.mean_r_format,
                            &s.mean_r_temporal, &s.mean_r_spatial, &s.mean_r_unified,
                            &s.kl,            &s.grad_norm,   &s.mean_response_actions};
        for (int i = 0; i < 9; ++i) {
            if (!std::getline(row, field, ','))
                throw ValidationError("curves csv: short row");
            try {
                if (i == 0)
                    s.step = std::stoi(field);
                else
                    *fields[i] = std::stod(field);
            } catch (const std::exception&) {
                throw ValidationError("curves csv: bad field '" + field + "'");
            }
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace veason
