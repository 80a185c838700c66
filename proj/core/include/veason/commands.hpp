#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "veason/env.hpp"
#include "veason/evalmetrics.hpp"
#include "veason/grpo.hpp"
#include "veason/rewards.hpp"
#include "veason/train.hpp"

namespace veason {

// Full run configuration; defaults reproduce the reference experiment. Loaded
// from a JSON or TOML file (chosen by extension), every field optional.
struct RunConfig {
    std::uint64_t seed = 7;
    EnvConfig env;
    RewardWeights weights;
    GrpoConfig grpo;
    TrainConfig train;
    std::string propagator = "labelmap";  // labelmap | oracle

    void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

// Parse the flat TOML subset used for config files into a JSON tree.
// Exposed for tests.
std::string toml_to_json_text(const std::string& toml_text);

std::unique_ptr<MaskPropagator> make_propagator(const std::string& name);

// Command entry points behind the CLI; each writes fixed file names into
// out_dir and returns the primary output path.
std::filesystem::path cmd_gen(const RunConfig& cfg, const std::filesystem::path& out_dir);

std::filesystem::path cmd_cot(const std::filesystem::path& manifest, const RunConfig& cfg,
                              const std::filesystem::path& out_dir);

std::filesystem::path cmd_score(const std::filesystem::path& manifest,
                                const std::filesystem::path& responses, const RunConfig& cfg,
                                const std::filesystem::path& out_dir);

struct TrainArtifacts {
    std::filesystem::path checkpoint;
    std::filesystem::path curves;
};
TrainArtifacts cmd_train(const std::filesystem::path& manifest, const RunConfig& cfg,
                         const std::filesystem::path& out_dir);

std::filesystem::path cmd_infer(const std::filesystem::path& manifest,
                                const std::filesystem::path& checkpoint, const RunConfig& cfg,
                                const std::filesystem::path& out_dir);

struct EvalArtifacts {
    EvalReport report;
    std::filesystem::path json_path;
};
EvalArtifacts cmd_eval(const std::filesystem::path& manifest,
                       const std::filesystem::path& predictions,
                       const std::filesystem::path& out_dir);

std::filesystem::path cmd_report(const std::filesystem::path& curves_csv,
                                 const std::filesystem::path& out_dir);

// Three-panel line plot (reward, KL, mean actions) as a standalone SVG.
std::string render_curves_svg(std::span<const StepStats> stats);

}  // namespace veason
