#include "veason/commands.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "veason/cotgen.hpp"
#include "veason/errors.hpp"
#include "veason/rng.hpp"

namespace veason {

namespace {

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<std::pair<std::string, std::string>> read_responses_jsonl(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("sample_id") ||
            !j.contains("response") || !j["sample_id"].is_string() || !j["response"].is_string())
            throw ValidationError("responses line " + std::to_string(line_no) +
                                  ": expected {\"sample_id\", \"response\"}");
        out.emplace_back(j["sample_id"].get<std::string>(), j["response"].get<std::string>());
    }
    return out;
}

}  // namespace

std::filesystem::path cmd_gen(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    Dataset ds = generate_dataset(cfg.seed, cfg.env);
    std::filesystem::path path = out_dir / "manifest.json";
    write_manifest(ds, path);
    return path;
}

std::filesystem::path cmd_cot(const std::filesystem::path& manifest, const RunConfig& cfg,
                              const std::filesystem::path& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    Dataset ds = load_manifest(manifest);
    std::vector<CotRecord> records;
    for (const Sample& s : ds.samples) {
        if (s.negative()) continue;
        Rng rng = Rng::stream(cfg.seed, "cot", s.index);
        int keyframe = sample_pseudo_keyframe(s.gt, rng);
        records.push_back(build_record(s, keyframe, rng));
    }
    std::filesystem::path path = out_dir / "cot.jsonl";
    write_cot_jsonl(records, path);
    return path;
}

std::filesystem::path cmd_score(const std::filesystem::path& manifest,
                                const std::filesystem::path& responses, const RunConfig& cfg,
                                const std::filesystem::path& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    Dataset ds = load_manifest(manifest);
    auto rows = read_responses_jsonl(responses);

    std::map<std::string, const Sample*> by_id;
    for (const Sample& s : ds.samples) by_id[s.sample_id] = &s;
    std::set<std::string> unknown;
    for (const auto& [id, text] : rows)
        if (!by_id.count(id)) unknown.insert(id);
    if (!unknown.empty()) {
        std::string list;
        for (const std::string& id : unknown) list += (list.empty() ? "" : ", ") + id;
        throw ValidationError("cmd_score: unknown sample ids: " + list);
    }

    auto propagator = make_propagator(cfg.propagator);
    std::filesystem::path path = out_dir / "scores.jsonl";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [id, text] : rows) {
        const Sample& s = *by_id[id];
        RewardBreakdown r = total_reward(text, s.gt, s.frames, cfg.weights, *propagator);
        nlohmann::ordered_json j;
        j["sample_id"] = id;
        j["r_f"] = r.r_format;
        j["r_k"] = r.r_temporal;
        j["r_s"] = r.r_spatial;
        j["r_u"] = r.r_unified;
        j["r_total"] = r.r_total;
        if (r.diagnostic) j["diag"] = *r.diagnostic;
        out << j.dump() << "\n";
    }
    return path;
}

TrainArtifacts cmd_train(const std::filesystem::path& manifest, const RunConfig& cfg,
                         const std::filesystem::path& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    Dataset ds = load_manifest(manifest);
    auto propagator = make_propagator(cfg.propagator);
    TrainOutput result =
        train_policy(ds, cfg.grpo, cfg.weights, *propagator, cfg.train, cfg.seed);
    TrainArtifacts artifacts{out_dir / "checkpoint.json", out_dir / "curves.csv"};
    write_checkpoint(result.policy, artifacts.checkpoint);
    write_curves_csv(artifacts.curves, result.curve);
    return artifacts;
}

std::filesystem::path cmd_infer(const std::filesystem::path& manifest,
                                const std::filesystem::path& checkpoint, const RunConfig& cfg,
                                const std::filesystem::path& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    Dataset ds = load_manifest(manifest);
    ToyPolicy policy = read_checkpoint(checkpoint);
    const ToyPolicyConfig& pc = policy.config();
    if (pc.frames != ds.config.frames || pc.grid != ds.config.grid ||
        pc.size_bins != ds.config.size_bins ||
        pc.feature_dim != ds.config.frames * features_per_frame(ds.config))
        throw ValidationError("cmd_infer: checkpoint does not match the manifest's environment");

    auto propagator = make_propagator(cfg.propagator);
    std::vector<std::pair<std::string, MaskSequence>> predictions;
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        predictions.emplace_back(ds.samples[i].sample_id,
                                 infer_masks(ds, i, policy, *propagator));
    std::filesystem::path path = out_dir / "predictions.jsonl";
    write_predictions(predictions, path);
    return path;
}

EvalArtifacts cmd_eval(const std::filesystem::path& manifest,
                       const std::filesystem::path& predictions,
                       const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    Dataset ds = load_manifest(manifest);
    Predictions preds = load_predictions(predictions);
    EvalArtifacts artifacts;
    artifacts.report = evaluate(ds, preds);
    artifacts.json_path = out_dir / "report.json";
    write_report_json(artifacts.report, artifacts.json_path);
    return artifacts;
}

std::filesystem::path cmd_report(const std::filesystem::path& curves_csv,
                                 const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    std::vector<StepStats> stats = read_curves_csv(curves_csv);
    if (stats.empty()) throw ValidationError("cmd_report: curves csv has no data rows");
    std::filesystem::path path = out_dir / "curves.svg";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << render_curves_svg(stats);
    return path;
}

}  // namespace veason
