#include "veason/cotgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "veason/errors.hpp"

namespace veason {

namespace {

const std::array<CotTemplate, 3> kTemplates = {{
    {1,
     "Looking over the sampled frames first: {scene_summary} {keyframe_justification} "
     "{localization_description}"},
    {2,
     "{scene_summary} Scanning each timestamp against the query: {keyframe_justification} "
     "{localization_description}"},
    {3,
     "Step one, the scene. {scene_summary} Step two, the keyframe. {keyframe_justification} "
     "Step three, the location. {localization_description}"},
}};

std::string format_seconds(double t) {
    if (t == std::floor(t)) return std::to_string(static_cast<long long>(t));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::string ordinal(int n) {
    int mod100 = n % 100;
    const char* suffix = "th";
    if (mod100 < 11 || mod100 > 13) {
        switch (n % 10) {
            case 1: suffix = "st"; break;
            case 2: suffix = "nd"; break;
            case 3: suffix = "rd"; break;
        }
    }
    return std::to_string(n) + suffix;
}

std::string position_phrase(const BinaryMask& m, int width, int height) {
    double sx = 0, sy = 0;
    int area = 0;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                sx += x + 0.5;
                sy += y + 0.5;
                ++area;
            }
    double cx = sx / area / width, cy = sy / area / height;
    static constexpr const char* rows[] = {"upper", "middle", "lower"};
    static constexpr const char* cols[] = {"left", "center", "right"};
    int ri = std::min(2, static_cast<int>(cy * 3));
    int ci = std::min(2, static_cast<int>(cx * 3));
    if (ri == 1 && ci == 1) return "center";
    return std::string(rows[ri]) + " " + cols[ci];
}

void replace_slot(std::string& text, std::string_view slot, const std::string& value) {
    auto pos = text.find(slot);
    text.replace(pos, slot.size(), value);
}

}  // namespace

std::span<const CotTemplate> cot_templates() { return kTemplates; }

int sample_pseudo_keyframe(const GroundTruthSample& gt, Rng& rng) {
    auto areas = gt.merged_areas();
    std::vector<int> order(areas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return areas[a] > areas[b]; });
    std::vector<int> candidates;
    for (int idx : order) {
        if (areas[idx] == 0) break;
        candidates.push_back(idx);
        if (candidates.size() == 5) break;
    }
    if (candidates.empty())
        throw ValidationError("sample_pseudo_keyframe: target absent from every frame");
    return candidates[rng.next_below(candidates.size())];
}

CotRecord build_record(const Sample& s, int pseudo_keyframe, Rng& rng) {
    if (s.negative()) throw ValidationError("build_record: negative samples get no record");
    auto areas = s.gt.merged_areas();
    if (areas[pseudo_keyframe] == 0)
        throw ValidationError("build_record: pseudo keyframe has no visible target");

    int rank = 1;
    for (std::size_t t = 0; t < areas.size(); ++t) {
        if (areas[t] > areas[pseudo_keyframe] ||
            (areas[t] == areas[pseudo_keyframe] && static_cast<int>(t) < pseudo_keyframe))
            ++rank;
    }

    std::string object_list;
    for (std::size_t i = 0; i < s.video.objects.size(); ++i) {
        const ObjectTrack& o = s.video.objects[i];
        if (i) object_list += i + 1 == s.video.objects.size() ? " and " : ", ";
        object_list += "a " + std::string(color_name(o.color_id)) + " " +
                       std::string(to_string(o.shape));
    }
    std::string scene = "The clip shows " + std::to_string(s.video.objects.size()) +
                        " moving objects across " + std::to_string(s.gt.frame_count()) +
                        " sampled frames: " + object_list + ".";
    if (!s.video.occluders.empty())
        scene += " " + std::to_string(s.video.occluders.size()) +
                 (s.video.occluders.size() == 1 ? " static bar partly hides the scene."
                                                : " static bars partly hide the scene.");

    double t_sec = s.gt.sampled_times[pseudo_keyframe];
    std::string justification = "At " + format_seconds(t_sec) + "s " +
                                s.query.expression_text + " is at its most visible, ranking " +
                                ordinal(rank) + " of " + std::to_string(s.gt.frame_count()) +
                                " frames by area.";

    auto boxes = s.gt.boxes_at(pseudo_keyframe);
    std::string location =
        "The target sits in the " +
        position_phrase(s.gt.merged_masks[pseudo_keyframe], s.video.width, s.video.height) +
        " of the frame, covering about " + std::to_string(areas[pseudo_keyframe]) +
        " pixels across " + std::to_string(boxes.size()) +
        (boxes.size() == 1 ? " instance box." : " instance boxes.");

    const CotTemplate& tpl = kTemplates[rng.next_below(kTemplates.size())];
    std::string think = tpl.text;
    replace_slot(think, "{scene_summary}", scene);
    replace_slot(think, "{keyframe_justification}", justification);
    replace_slot(think, "{localization_description}", location);

    std::string prompt;
    for (int t = 0; t < s.gt.frame_count(); ++t)
        prompt += "<" + format_seconds(s.gt.sampled_times[t]) + "s><image>";
    prompt += "\nYou are given " + std::to_string(s.gt.frame_count()) +
              " uniformly sampled video frames, each preceded by its timestamp. Find " +
              s.query.expression_text +
              ". Think through the frames step by step, pick the single keyframe timestamp "
              "where the target is most visible, then report one bounding box per target "
              "instance in that frame. Wrap the reasoning in think tags and give the final "
              "answer inside answer tags as a dictionary with keyframe_timestamp and "
              "bbox_2d_list.";

    StructuredResponse target;
    target.think_text = think;
    target.keyframe_timestamp = t_sec;
    target.boxes = boxes;

    CotRecord record;
    record.sample_id = s.sample_id;
    record.prompt_text = std::move(prompt);
    record.target_text = serialize_response(target);
    return record;
}

void write_cot_jsonl(std::span<const CotRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const CotRecord& r : records) {
        nlohmann::ordered_json j;
        j["sample_id"] = r.sample_id;
        j["prompt"] = r.prompt_text;
        j["target"] = r.target_text;
        out << j.dump() << "\n";
    }
}

std::vector<CotRecord> read_cot_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<CotRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ValidationError("cot jsonl: invalid JSON line");
        CotRecord r;
        r.sample_id = j.at("sample_id").get<std::string>();
        r.prompt_text = j.at("prompt").get<std::string>();
        r.target_text = j.at("target").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace veason
