// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure. Criteria run in order and keep going after a failure so the full
// scorecard always prints.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "veason/commands.hpp"
#include "veason/cotgen.hpp"
#include "veason/env.hpp"
#include "veason/errors.hpp"
#include "veason/evalmetrics.hpp"
#include "veason/grpo.hpp"
#include "veason/policy.hpp"
#include "veason/rewards.hpp"
#include "veason/rng.hpp"
#include "veason/train.hpp"

using namespace veason;
using veason::testing::make_scene;

namespace {

int failures = 0;

struct Criterion {
    int id;
    const char* name;
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && passed) {
            passed = false;
            detail = what;
        } else if (!ok) {
            detail += "; " + what;
        }
    }
};

void run(int id, const char* name, const std::function<void(Criterion&)>& body) {
    Criterion c{id, name, true, {}};
    auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %-38s (%.2fs)%s%s\n", c.passed ? "PASS" : "FAIL", id, name,
                seconds, c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
    if (!c.passed) ++failures;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// criterion 1: advantage normalization
void criterion_advantages(Criterion& c) {
    Rng rng(1001);
    for (int it = 0; it < 1000; ++it) {
        int g = 2 + static_cast<int>(rng.next_below(15));
        std::vector<double> rewards(g);
        bool constant = it % 7 == 0;
        double base = rng.next_range(-2, 6);
        for (double& r : rewards) r = constant ? base : rng.next_range(0, 4);
        auto adv = advantages(rewards, 0.0);

        double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / g;
        c.require(std::abs(mean) <= 1e-9, "advantage mean exceeded 1e-9");
        double var = 0;
        for (double v : adv) var += v * v;
        var /= g;
        bool zero_variance =
            std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; });
        if (zero_variance) {
            c.require(std::all_of(adv.begin(), adv.end(), [](double v) { return v == 0.0; }),
                      "zero-variance group not exactly zero");
        } else {
            c.require(std::abs(std::sqrt(var) - 1.0) <= 1e-9, "advantage std not within 1e-9 of 1");
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 2: Hungarian vs exhaustive permutations
struct ExhaustiveAssign {
    const Matrix& cost;
    int need;
    std::vector<bool> col_used;
    std::vector<std::pair<int, int>> current, best;
    double best_cost = std::numeric_limits<double>::infinity();

    explicit ExhaustiveAssign(const Matrix& m)
        : cost(m), need(std::min(m.rows, m.cols)), col_used(m.cols, false) {}

    void run(int row, double acc) {
        if (static_cast<int>(current.size()) == need) {
            if (acc < best_cost) {
                best_cost = acc;
                best = current;
            }
            return;
        }
        if (row == cost.rows || cost.rows - row < need - static_cast<int>(current.size())) return;
        for (int col = 0; col < cost.cols; ++col) {
            if (col_used[col]) continue;
            col_used[col] = true;
            current.emplace_back(row, col);
            run(row + 1, acc + cost.at(row, col));
            current.pop_back();
            col_used[col] = false;
        }
        run(row + 1, acc);
    }
};

void criterion_hungarian(Criterion& c) {
    Rng rng(1002);
    for (int it = 0; it < 500; ++it) {
        int rows = 1 + static_cast<int>(rng.next_below(6));
        int cols = 1 + static_cast<int>(rng.next_below(6));
        Matrix m(rows, cols);
        bool quantized = it % 2 == 0;
        for (double& v : m.values)
            v = quantized ? static_cast<double>(rng.next_below(32)) / 32.0 : rng.next_double();
        ExhaustiveAssign oracle(m);
        oracle.run(0, 0.0);
        Assignment got = hungarian(m);
        c.require(got.total_cost() == oracle.best_cost,
                  "assignment cost differs from the exhaustive minimum");
        if (quantized)
            c.require(got.matched_pairs == oracle.best, "tie-break differs from lexicographic");
    }
}

// ---------------------------------------------------------------------------
// criterion 3: reward fixtures, hand-computed
void criterion_fixtures(Criterion& c) {
    const std::vector<double> times3 = {0, 1, 2};
    // single object, merged areas 10 / 40 / 25
    auto area_scene = make_scene(16, 16,
                                 {{BoundingBox{0, 0, 10, 1}},
                                  {BoundingBox{0, 0, 10, 4}},
                                  {BoundingBox{0, 0, 5, 5}}},
                                 times3);
    auto empty_scene =
        make_scene(16, 16, {{std::nullopt}, {std::nullopt}, {std::nullopt}}, times3);
    OraclePropagator oracle;
    veason::testing::EmptyPropagator empty_prop;
    RewardWeights unit;
    int fixture = 0;
    auto check = [&](bool ok, const char* what) {
        ++fixture;
        c.require(ok, std::string("fixture ") + std::to_string(fixture) + ": " + what);
    };
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
    auto valid = [](double t, std::vector<BoundingBox> boxes) {
        StructuredResponse r;
        r.think_text = "reasoning";
        r.keyframe_timestamp = t;
        r.boxes = std::move(boxes);
        return serialize_response(r);
    };

    // format (3)
    check(format_reward(valid(1, {{0, 0, 4, 4}})) == 1.0, "well-formed format reward");
    check(format_reward("<think>only</think>") == 0.0, "missing answer");
    check(format_reward("<think>x</think><answer>{\"keyframe_timestamp\":1,"
                        "\"bbox_2d_list\":\"str\"}</answer>") == 0.0,
          "string bbox payload");

    // temporal (4)
    check(near(temporal_reward(1, area_scene.gt, false), 1.0), "max-area frame");
    check(near(temporal_reward(2, area_scene.gt, false), 0.625), "25/40 ratio");
    check(near(temporal_reward(0, area_scene.gt, false), 0.25), "10/40 ratio");
    check(near(temporal_reward(0, empty_scene.gt, true), 1.0) &&
              near(temporal_reward(0, empty_scene.gt, false), 0.0),
          "absent-target rules");

    // spatial (5)
    std::vector<BoundingBox> two = {{0, 0, 10, 10}, {20, 0, 30, 10}};
    check(near(spatial_reward(two, two), 1.0), "exact two-box match");
    check(near(spatial_reward({{0, 0, 10, 8}, {50, 50, 60, 60}}, {{0, 0, 10, 10}}), 0.4),
          "0.8 IoU over max(2,1)");
    check(near(spatial_reward({}, two), 0.0), "empty prediction");
    check(near(spatial_reward({}, {}), 1.0), "both empty");
    check(near(spatial_reward({two[1], two[0]}, two), 1.0), "permutation invariance");

    // unified (4)
    auto track_scene = make_scene(16, 16,
                                  {{BoundingBox{0, 0, 4, 4}},
                                   {BoundingBox{5, 5, 11, 11}},
                                   {BoundingBox{10, 10, 14, 14}}},
                                  times3);
    check(near(unified_reward({{5, 5, 11, 11}}, 1, track_scene.gt, track_scene.frames, oracle)
                   .value,
               1.0),
          "perfect box propagates the full track");
    check(near(unified_reward({}, 0, empty_scene.gt, empty_scene.frames, oracle).value, 1.0),
          "empty prediction on empty gt");
    check(near(unified_reward({{0, 0, 10, 4}}, 1, area_scene.gt, area_scene.frames, empty_prop)
                   .value,
               0.0),
          "empty propagation on nonempty gt");
    check(near(unified_reward({{12, 0, 15, 3}}, 1, track_scene.gt, track_scene.frames, oracle)
                   .value,
               0.0),
          "zero-overlap box propagates nothing");

    // total (4)
    RewardBreakdown perfect = total_reward(valid(1, area_scene.gt.boxes_at(1)), area_scene.gt,
                                           area_scene.frames, unit, oracle);
    check(near(perfect.r_total, 4.0) && near(perfect.r_total,
                                             perfect.r_format + perfect.r_temporal +
                                                 perfect.r_spatial + perfect.r_unified),
          "perfect response totals 4.0");
    RewardBreakdown gated =
        total_reward("<answer>{}</answer>", area_scene.gt, area_scene.frames, unit, oracle);
    check(gated.r_format == 0 && gated.r_temporal == 0 && gated.r_spatial == 0 &&
              gated.r_unified == 0 && gated.r_total == 0,
          "malformed response gates to zero");
    RewardBreakdown half = total_reward(valid(1, {{12, 12, 15, 15}}), area_scene.gt,
                                        area_scene.frames, unit, oracle);
    check(near(half.r_total, 2.0) && near(half.r_temporal, 1.0) && near(half.r_spatial, 0.0) &&
              near(half.r_unified, 0.0),
          "right keyframe and useless boxes total 2.0");
    RewardWeights weighted{2.0, 1.0, 0.5, 0.25};
    RewardBreakdown mixed = total_reward(valid(2, area_scene.gt.boxes_at(2)), area_scene.gt,
                                         area_scene.frames, weighted, oracle);
    double expected = 2.0 * mixed.r_format + 1.0 * mixed.r_temporal + 0.5 * mixed.r_spatial +
                      0.25 * mixed.r_unified;
    check(near(mixed.r_total, expected) && near(mixed.r_temporal, 0.625),
          "weighted sum identity");

    c.require(fixture == 20, "expected exactly 20 fixtures, ran " + std::to_string(fixture));
}

// ---------------------------------------------------------------------------
// criterion 4: oracle closure on a generated dataset
void criterion_oracle_closure(Criterion& c) {
    EnvConfig cfg;
    cfg.n_videos = 200;
    Dataset ds = generate_dataset(4004, cfg);
    OraclePropagator oracle;
    RewardWeights unit;
    Predictions predictions;
    for (const Sample& s : ds.samples) {
        StructuredResponse canonical = canonical_ground_truth_response(s);
        std::string text = serialize_response(canonical);
        RewardBreakdown r = total_reward(text, s.gt, s.frames, unit, oracle);
        if (!s.negative())
            c.require(r.r_total == 4.0, "positive sample " + s.sample_id + " scored " +
                                            std::to_string(r.r_total));
        int keyframe = snap_timestamp(canonical.keyframe_timestamp, s.gt.sampled_times);
        predictions[s.sample_id] =
            s.negative() ? MaskSequence(s.gt.frame_count(), BinaryMask(cfg.width, cfg.height))
                         : oracle.propagate(canonical.boxes, s.frames, keyframe);
    }
    EvalReport report = evaluate(ds, predictions);
    for (const char* subset : {"referring", "reasoning", "overall"}) {
        auto it = report.subsets.find(subset);
        if (it == report.subsets.end()) continue;
        c.require(it->second.j == 100.0 && it->second.f == 100.0 && it->second.jf == 100.0,
                  std::string(subset) + " aggregate not exactly 100");
    }
    c.require(report.robustness_r.has_value() && *report.robustness_r == 100.0,
              "robustness not exactly 100");
}

// ---------------------------------------------------------------------------
// criterion 5: analytic gradient vs central finite differences
void criterion_gradient(Criterion& c) {
    Rng rng(5005);
    for (int config = 0; config < 100; ++config) {
        ToyPolicyConfig pc;
        pc.frames = 2 + static_cast<int>(rng.next_below(3));
        pc.grid = 2 + static_cast<int>(rng.next_below(2));
        pc.size_bins = 2;
        pc.feature_dim = 2 + static_cast<int>(rng.next_below(4));
        pc.temperature = 1.0;

        ToyPolicy policy(pc), reference(pc);
        for (double& v : policy.parameters()) v = 0.6 * rng.next_normal();
        for (double& v : reference.parameters()) v = 0.6 * rng.next_normal();
        std::vector<double> features(pc.feature_dim);
        for (double& v : features) v = rng.next_normal();

        ToyPolicyAdapter adapter(policy, reference);
        adapter.set_features("p", features);
        SampleGroup group;
        group.prompt_id = "p";
        int g = 4 + static_cast<int>(rng.next_below(5));
        for (int i = 0; i < g; ++i) {
            ToyAction a = policy.sample_action(features, rng);
            double lp = policy.action_logprob(features, a, {});
            group.responses.push_back(encode_action(a));
            group.rewards.push_back(rng.next_range(0, 4));
            group.logprob_new.push_back(lp);
            group.logprob_old.push_back(lp + rng.next_range(-0.3, 0.3));
            group.logprob_ref.push_back(reference.action_logprob(features, a, {}));
        }
        GrpoConfig gc;
        gc.group_size = g;
        gc.beta = config % 3 == 0 ? 0.0 : (config % 3 == 1 ? 1.0 : rng.next_range(0, 0.5));

        ObjectiveEval eval = group_objective(adapter, group, gc, true);
        std::span<double> params = adapter.parameters();
        const double h = 1e-6;
        for (std::size_t k = 0; k < params.size(); ++k) {
            double saved = params[k];
            params[k] = saved + h;
            double up = group_objective(adapter, group, gc, false).value;
            params[k] = saved - h;
            double down = group_objective(adapter, group, gc, false).value;
            params[k] = saved;
            double fd = (up - down) / (2 * h);
            double denom = std::max({1e-2, std::abs(fd), std::abs(eval.gradient[k])});
            if (std::abs(eval.gradient[k] - fd) / denom > 1e-4) {
                c.require(false, "config " + std::to_string(config) + " parameter " +
                                     std::to_string(k) + ": analytic " +
                                     std::to_string(eval.gradient[k]) + " vs fd " +
                                     std::to_string(fd));
                return;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// criteria 6 and 7: the learning experiment and the spatial-reward ablation
struct ExperimentResult {
    double first_band = 0;
    double last_band = 0;
    double min_kl = 0;
    bool kl_finite = true;
    double holdout_jf = 0;
};

ExperimentResult run_experiment(const Dataset& train_ds, const Dataset& holdout,
                                const RewardWeights& weights) {
    GrpoConfig gc;  // defaults: G=8, beta=5e-3, tuned learning rate
    TrainConfig tc;  // defaults: batch 16, 300 steps
    LabelMapPropagator propagator;
    TrainOutput out = train_policy(train_ds, gc, weights, propagator, tc, train_ds.seed);

    ExperimentResult result;
    int band = 30;
    int n = static_cast<int>(out.curve.size());
    double first = 0, last = 0;
    result.min_kl = out.curve.empty() ? 0 : out.curve[0].kl;
    for (int i = 0; i < n; ++i) {
        if (i < band) first += out.curve[i].mean_reward;
        if (i >= n - band) last += out.curve[i].mean_reward;
        result.kl_finite = result.kl_finite && std::isfinite(out.curve[i].kl);
        result.min_kl = std::min(result.min_kl, out.curve[i].kl);
    }
    result.first_band = first / band;
    result.last_band = last / band;

    Predictions predictions;
    for (std::size_t i = 0; i < holdout.samples.size(); ++i)
        predictions[holdout.samples[i].sample_id] =
            infer_masks(holdout, i, out.policy, propagator);
    EvalReport report = evaluate(holdout, predictions);
    result.holdout_jf = report.subsets.at("overall").jf;
    return result;
}

double untrained_holdout_jf(const Dataset& holdout) {
    ToyPolicyConfig pc;
    pc.frames = holdout.config.frames;
    pc.grid = holdout.config.grid;
    pc.size_bins = holdout.config.size_bins;
    pc.feature_dim = holdout.config.frames * features_per_frame(holdout.config);
    ToyPolicy fresh(pc);
    LabelMapPropagator propagator;
    Predictions predictions;
    for (std::size_t i = 0; i < holdout.samples.size(); ++i)
        predictions[holdout.samples[i].sample_id] = infer_masks(holdout, i, fresh, propagator);
    return evaluate(holdout, predictions).subsets.at("overall").jf;
}

void criterion_learning(Criterion& c, ExperimentResult& full, double& untrained,
                        Dataset& train_ds, Dataset& holdout) {
    EnvConfig cfg;  // defaults: 200 videos, T=8, 64x64, labelmap-compatible
    train_ds = generate_dataset(7, cfg);
    EnvConfig holdout_cfg = cfg;
    holdout_cfg.n_videos = 50;
    holdout = generate_dataset(7 + 1, holdout_cfg);

    full = run_experiment(train_ds, holdout, RewardWeights{});
    untrained = untrained_holdout_jf(holdout);

    c.require(full.last_band - full.first_band >= 0.5,
              "reward gain " + std::to_string(full.last_band - full.first_band) + " < 0.5");
    c.require(full.kl_finite, "non-finite KL during training");
    c.require(full.min_kl >= -1e-9, "KL dipped below -1e-9");
    c.require(full.holdout_jf - untrained >= 10.0,
              "J&F gain " + std::to_string(full.holdout_jf - untrained) + " < 10 (trained " +
                  std::to_string(full.holdout_jf) + ", untrained " + std::to_string(untrained) +
                  ")");
}

void criterion_ablation(Criterion& c, const ExperimentResult& full, const Dataset& train_ds,
                        const Dataset& holdout) {
    RewardWeights no_spatial;
    no_spatial.alpha_s = 0.0;
    ExperimentResult ablated = run_experiment(train_ds, holdout, no_spatial);
    c.require(ablated.holdout_jf < full.holdout_jf,
              "ablated J&F " + std::to_string(ablated.holdout_jf) + " not below full " +
                  std::to_string(full.holdout_jf));
}

// ---------------------------------------------------------------------------
// criterion 8: parser fuzz and round-trip
void criterion_fuzz(Criterion& c) {
    Rng rng(8008);
    for (int it = 0; it < 100000; ++it) {
        std::string s;
        int len = static_cast<int>(rng.next_below(160));
        for (int i = 0; i < len; ++i) s += static_cast<char>(rng.next_below(256));
        ParseResult r = parse_response(s);
        if (r.ok()) {
            c.require(!r.verdict.failure.has_value(), "ok result carries a failure");
        } else {
            c.require(r.verdict.failure.has_value(), "failure without a reason");
        }
    }
    for (int it = 0; it < 10000; ++it) {
        StructuredResponse r;
        int len = static_cast<int>(rng.next_below(50));
        for (int i = 0; i < len; ++i) r.think_text += static_cast<char>(32 + rng.next_below(95));
        while (r.think_text.find("</think>") != std::string::npos ||
               r.think_text.find("</answer>") != std::string::npos)
            r.think_text.pop_back();
        r.keyframe_timestamp = rng.next_range(0, 500);
        int boxes = static_cast<int>(rng.next_below(5));
        for (int b = 0; b < boxes; ++b) {
            double x = rng.next_range(-20, 600), y = rng.next_range(-20, 600);
            r.boxes.push_back({x, y, x + rng.next_range(0, 100), y + rng.next_range(0, 100)});
        }
        ParseResult round = parse_response(serialize_response(r));
        if (!round.ok()) {
            c.require(false, "round-trip failed to parse");
            return;
        }
        c.require(round.response->think_text == r.think_text &&
                      round.response->keyframe_timestamp == r.keyframe_timestamp &&
                      round.response->boxes == r.boxes,
                  "round-trip changed fields");
    }
}

// ---------------------------------------------------------------------------
// criterion 9: byte determinism of gen / cot / train
void criterion_determinism(Criterion& c) {
    auto root = std::filesystem::temp_directory_path() / "veason_acceptance_det";
    std::filesystem::remove_all(root);
    RunConfig cfg;
    cfg.seed = 99;
    cfg.env.n_videos = 30;
    cfg.train.steps = 40;
    cfg.train.batch_size = 8;

    auto m1 = cmd_gen(cfg, root / "a");
    auto m2 = cmd_gen(cfg, root / "b");
    c.require(slurp(m1) == slurp(m2), "manifests differ");

    auto c1 = cmd_cot(m1, cfg, root / "a");
    auto c2 = cmd_cot(m2, cfg, root / "b");
    c.require(slurp(c1) == slurp(c2), "cot records differ");

    TrainArtifacts t1 = cmd_train(m1, cfg, root / "a");
    TrainArtifacts t2 = cmd_train(m2, cfg, root / "b");
    c.require(slurp(t1.checkpoint) == slurp(t2.checkpoint), "checkpoints differ");
    c.require(slurp(t1.curves) == slurp(t2.curves), "curves differ");
    std::filesystem::remove_all(root);
}

// ---------------------------------------------------------------------------
// criterion 10: CoT self-consistency
void criterion_cot(Criterion& c) {
    EnvConfig cfg;
    cfg.n_videos = 120;
    Dataset ds = generate_dataset(1010, cfg);
    for (const Sample& s : ds.samples) {
        if (s.negative()) continue;
        Rng rng = Rng::stream(1010, "cot", s.index);
        int keyframe = sample_pseudo_keyframe(s.gt, rng);
        CotRecord record = build_record(s, keyframe, rng);
        ParseResult parsed = parse_response(record.target_text);
        if (!parsed.ok()) {
            c.require(false, "record for " + s.sample_id + " does not parse");
            continue;
        }
        int frame = snap_timestamp(parsed.response->keyframe_timestamp, s.gt.sampled_times);
        c.require(spatial_reward(parsed.response->boxes, s.gt.boxes_at(frame)) == 1.0,
                  "spatial reward below 1 for " + s.sample_id);

        auto areas = s.gt.merged_areas();
        std::vector<int> order(areas.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return areas[a] > areas[b]; });
        bool in_top5 = false;
        for (std::size_t i = 0; i < order.size() && i < 5; ++i) in_top5 |= order[i] == frame;
        c.require(in_top5, "keyframe outside the top-5 set for " + s.sample_id);
    }
}

}  // namespace

int main() {
    Dataset train_ds, holdout;
    ExperimentResult full;
    double untrained = 0;

    run(1, "advantage normalization", criterion_advantages);
    run(2, "Hungarian exhaustive oracle", criterion_hungarian);
    run(3, "reward fixtures", criterion_fixtures);
    run(4, "oracle closure", criterion_oracle_closure);
    run(5, "objective gradient check", criterion_gradient);
    run(6, "learning experiment", [&](Criterion& c) {
        criterion_learning(c, full, untrained, train_ds, holdout);
    });
    run(7, "spatial-reward ablation", [&](Criterion& c) {
        criterion_ablation(c, full, train_ds, holdout);
    });
    run(8, "parser fuzz and round-trip", criterion_fuzz);
    run(9, "command determinism", criterion_determinism);
    run(10, "CoT self-consistency", criterion_cot);

    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
