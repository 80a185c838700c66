#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "veason/env.hpp"
#include "veason/rng.hpp"

namespace veason {

// Reasoning-text template with three slots: {scene_summary},
// {keyframe_justification} and {localization_description}, each exactly once.
struct CotTemplate {
    int template_id = 0;
    std::string text;
};

std::span<const CotTemplate> cot_templates();

// One supervised record: the rendered prompt and a tag-wrapped target the
// response parser accepts.
struct CotRecord {
    std::string sample_id;
    std::string prompt_text;
    std::string target_text;
};

// Uniform pick among the up-to-5 nonempty frames with the largest merged
// area, ranking ties broken toward earlier frames. Throws when the target is
// absent from every frame.
int sample_pseudo_keyframe(const GroundTruthSample& gt, Rng& rng);

// Render a record for a positive sample around the chosen pseudo keyframe:
// random template, deterministic slot fills, ground-truth answer.
CotRecord build_record(const Sample& s, int pseudo_keyframe, Rng& rng);

void write_cot_jsonl(std::span<const CotRecord> records, const std::filesystem::path& path);
std::vector<CotRecord> read_cot_jsonl(const std::filesystem::path& path);

}  // namespace veason
