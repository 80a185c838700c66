#include "veason/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "veason/errors.hpp"

namespace veason {

std::string encode_action(const ToyAction& a) {
    return std::to_string(a.keyframe) + "/" + std::to_string(a.cell) + "/" +
           std::to_string(a.size_bin);
}

ToyAction decode_action(const std::string& record) {
    ToyAction a;
    if (std::sscanf(record.c_str(), "%d/%d/%d", &a.keyframe, &a.cell, &a.size_bin) != 3)
        throw ValidationError("decode_action: bad action record '" + record + "'");
    return a;
}

namespace {

// rows laid out head by head: keyframe, center cell, size bin
int head_row_offset(const ToyPolicyConfig& cfg, int head) {
    int off = 0;
    for (int h = 0; h < head; ++h) off += cfg.head_size(h);
    return off;
}

}  // namespace

std::vector<double> ToyPolicy::head_logprobs(int head, std::span<const double> features) const {
    if (static_cast<int>(features.size()) != cfg_.feature_dim)
        throw ValidationError("ToyPolicy: feature vector has wrong length");
    int n = cfg_.head_size(head);
    int stride = cfg_.feature_dim + 1;
    int base = head_row_offset(cfg_, head);
    std::vector<double> z(n);
    for (int j = 0; j < n; ++j) {
        const double* row = params_.data() + static_cast<std::size_t>(base + j) * stride;
        double acc = row[cfg_.feature_dim];  // bias
        for (int d = 0; d < cfg_.feature_dim; ++d) acc += row[d] * features[d];
        z[j] = acc / cfg_.temperature;
    }
    double m = *std::max_element(z.begin(), z.end());
    double lse = 0;
    for (double v : z) lse += std::exp(v - m);
    lse = m + std::log(lse);
    for (double& v : z) v -= lse;
    return z;
}

ToyAction ToyPolicy::sample_action(std::span<const double> features, Rng& rng) const {
    int picks[3];
    for (int head = 0; head < 3; ++head) {
        std::vector<double> lp = head_logprobs(head, features);
        double u = rng.next_double();
        double acc = 0;
        int pick = static_cast<int>(lp.size()) - 1;
        for (std::size_t j = 0; j < lp.size(); ++j) {
            acc += std::exp(lp[j]);
            if (u < acc) {
                pick = static_cast<int>(j);
                break;
            }
        }
        picks[head] = pick;
    }
    return {picks[0], picks[1], picks[2]};
}

ToyAction ToyPolicy::greedy_action(std::span<const double> features) const {
    int picks[3];
    for (int head = 0; head < 3; ++head) {
        std::vector<double> lp = head_logprobs(head, features);
        picks[head] = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    }
    return {picks[0], picks[1], picks[2]};
}

double ToyPolicy::action_logprob(std::span<const double> features, const ToyAction& a,
                                 std::span<double> grad_out) const {
    bool want_grad = !grad_out.empty();
    if (want_grad) {
        if (grad_out.size() != cfg_.parameter_count())
            throw ValidationError("ToyPolicy: gradient buffer has wrong length");
        std::fill(grad_out.begin(), grad_out.end(), 0.0);
    }
    int choice[3] = {a.keyframe, a.cell, a.size_bin};
    int stride = cfg_.feature_dim + 1;
    double total = 0;
    for (int head = 0; head < 3; ++head) {
        int n = cfg_.head_size(head);
        if (choice[head] < 0 || choice[head] >= n)
            throw ValidationError("ToyPolicy: action choice out of range");
        std::vector<double> lp = head_logprobs(head, features);
        total += lp[choice[head]];
        if (!want_grad) continue;
        int base = head_row_offset(cfg_, head);
        for (int j = 0; j < n; ++j) {
            double coeff = ((j == choice[head]) ? 1.0 : 0.0) - std::exp(lp[j]);
            coeff /= cfg_.temperature;
            double* row = grad_out.data() + static_cast<std::size_t>(base + j) * stride;
            for (int d = 0; d < cfg_.feature_dim; ++d) row[d] += coeff * features[d];
            row[cfg_.feature_dim] += coeff;
        }
    }
    return total;
}

double ToyPolicy::kl_against(const ToyPolicy& ref, std::span<const double> features,
                             std::span<double> grad_out) const {
    bool want_grad = !grad_out.empty();
    if (want_grad) std::fill(grad_out.begin(), grad_out.end(), 0.0);
    int stride = cfg_.feature_dim + 1;
    double total = 0;
    for (int head = 0; head < 3; ++head) {
        std::vector<double> lp = head_logprobs(head, features);
        std::vector<double> lq = ref.head_logprobs(head, features);
        int n = cfg_.head_size(head);
        double kl = 0;
        for (int j = 0; j < n; ++j) kl += std::exp(lp[j]) * (lp[j] - lq[j]);
        total += kl;
        if (!want_grad) continue;
        int base = head_row_offset(cfg_, head);
        for (int j = 0; j < n; ++j) {
            double pj = std::exp(lp[j]);
            double coeff = pj * ((lp[j] - lq[j]) - kl) / cfg_.temperature;
            double* row = grad_out.data() + static_cast<std::size_t>(base + j) * stride;
            for (int d = 0; d < cfg_.feature_dim; ++d) row[d] += coeff * features[d];
            row[cfg_.feature_dim] += coeff;
        }
    }
    return total;
}

std::string_view toy_think_text() {
    return "Comparing the sampled frames, the referred object is most visible at the chosen "
           "timestamp, so I ground it there with one bounding box.";
}

double size_bin_fraction(int bin, int size_bins) {
    static constexpr double kFourBins[4] = {0.1, 0.2, 0.35, 0.5};
    if (bin < 0 || bin >= size_bins) throw ValidationError("size_bin_fraction: bin out of range");
    if (size_bins == 4) return kFourBins[bin];
    if (size_bins == 1) return 0.3;
    return 0.1 + 0.4 * static_cast<double>(bin) / (size_bins - 1);
}

StructuredResponse action_to_response(const ToyAction& a, std::span<const double> sampled_times,
                                      const EnvConfig& cfg) {
    StructuredResponse r;
    r.think_text = std::string(toy_think_text());
    r.keyframe_timestamp = sampled_times[a.keyframe];
    int gx = a.cell % cfg.grid, gy = a.cell / cfg.grid;
    double cx = (gx + 0.5) * cfg.width / cfg.grid;
    double cy = (gy + 0.5) * cfg.height / cfg.grid;
    double side = size_bin_fraction(a.size_bin, cfg.size_bins) * std::min(cfg.width, cfg.height);
    BoundingBox b{cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2};
    b.x1 = std::max(0.0, b.x1);
    b.y1 = std::max(0.0, b.y1);
    b.x2 = std::min(static_cast<double>(cfg.width), b.x2);
    b.y2 = std::min(static_cast<double>(cfg.height), b.y2);
    r.boxes.push_back(b);
    return r;
}

std::vector<SampledAction> sample_actions(const ToyPolicy& policy,
                                          std::span<const double> features,
                                          std::span<const double> sampled_times,
                                          const EnvConfig& cfg, int g, Rng& rng) {
    if (g < 2) throw ValidationError("sample_actions: group size must be >= 2");
    std::vector<SampledAction> out;
    out.reserve(g);
    for (int i = 0; i < g; ++i) {
        SampledAction s;
        s.action = policy.sample_action(features, rng);
        s.logprob = policy.action_logprob(features, s.action, {});
        s.response_text = serialize_response(action_to_response(s.action, sampled_times, cfg));
        out.push_back(std::move(s));
    }
    return out;
}

void ToyPolicyAdapter::set_features(const std::string& prompt_id, std::vector<double> features) {
    features_[prompt_id] = std::move(features);
}

const std::vector<double>& ToyPolicyAdapter::features(const std::string& prompt_id) const {
    auto it = features_.find(prompt_id);
    if (it == features_.end())
        throw ValidationError("ToyPolicyAdapter: unknown prompt id " + prompt_id);
    return it->second;
}

double ToyPolicyAdapter::action_logprob(const std::string& prompt_id, const std::string& action,
                                        std::span<double> grad_out) const {
    return policy_->action_logprob(features(prompt_id), decode_action(action), grad_out);
}

std::optional<double> ToyPolicyAdapter::exact_kl(const std::string& prompt_id,
                                                 std::span<double> grad_out) const {
    return policy_->kl_against(*reference_, features(prompt_id), grad_out);
}

void write_checkpoint(const ToyPolicy& policy, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    const ToyPolicyConfig& c = policy.config();
    j["config"] = {{"frames", c.frames},
                   {"grid", c.grid},
                   {"size_bins", c.size_bins},
                   {"feature_dim", c.feature_dim},
                   {"temperature", c.temperature}};
    j["params"] = std::vector<double>(policy.parameters().begin(), policy.parameters().end());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(1) << "\n";
}

ToyPolicy read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ValidationError("checkpoint: invalid JSON");
    try {
        ToyPolicyConfig c;
        c.frames = j.at("config").at("frames").get<int>();
        c.grid = j.at("config").at("grid").get<int>();
        c.size_bins = j.at("config").at("size_bins").get<int>();
        c.feature_dim = j.at("config").at("feature_dim").get<int>();
        c.temperature = j.at("config").at("temperature").get<double>();
        ToyPolicy policy(c);
        auto params = j.at("params").get<std::vector<double>>();
        if (params.size() != c.parameter_count())
            throw ValidationError("checkpoint: parameter count mismatch");
        std::copy(params.begin(), params.end(), policy.parameters().begin());
        return policy;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace veason
