#include "veason/rewards.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "veason/errors.hpp"

namespace veason {

std::vector<BoundingBox> GroundTruthSample::boxes_at(int frame) const {
    std::vector<BoundingBox> out;
    for (const auto& b : object_boxes[frame])
        if (b) out.push_back(*b);
    return out;
}

std::vector<int> GroundTruthSample::merged_areas() const {
    std::vector<int> out;
    out.reserve(merged_masks.size());
    for (const auto& m : merged_masks) out.push_back(mask_area(m));
    return out;
}

void GroundTruthSample::validate() const {
    std::size_t frames = sampled_times.size();
    if (object_masks.size() != frames || object_boxes.size() != frames ||
        merged_masks.size() != frames)
        throw ValidationError("GroundTruthSample: per-frame collections must all have length T");
    for (std::size_t t = 0; t < frames; ++t) {
        if (object_masks[t].size() != object_ids.size() ||
            object_boxes[t].size() != object_ids.size())
            throw ValidationError("GroundTruthSample: per-object collections out of step");
        for (std::size_t o = 0; o < object_ids.size(); ++o) {
            auto tb = tight_box(object_masks[t][o]);
            if (tb.has_value() != object_boxes[t][o].has_value() ||
                (tb && !(*tb == *object_boxes[t][o])))
                throw ValidationError("GroundTruthSample: box is not the tight box of its mask");
        }
    }
}

BinaryMask SceneFrames::label_mask(int frame, std::int32_t label) const {
    BinaryMask m(width, height);
    const auto& lm = label_maps[frame];
    for (std::size_t i = 0; i < lm.size(); ++i) m.bits[i] = lm[i] == label ? 1 : 0;
    return m;
}

std::vector<std::int32_t> SceneFrames::labels_present() const {
    std::set<std::int32_t> seen;
    for (const auto& lm : label_maps)
        for (std::int32_t v : lm)
            if (v > 0) seen.insert(v);
    return {seen.begin(), seen.end()};
}

namespace {

MaskSequence empty_sequence(const SceneFrames& frames) {
    return MaskSequence(frames.frame_count(), BinaryMask(frames.width, frames.height));
}

void union_into(MaskSequence& acc, const BinaryMask& m, int frame) {
    for (std::size_t i = 0; i < m.bits.size(); ++i) acc[frame].bits[i] |= m.bits[i];
}

}  // namespace

MaskSequence OraclePropagator::propagate(const std::vector<BoundingBox>& boxes,
                                         const SceneFrames& frames, int keyframe_index) const {
    if (keyframe_index < 0 || keyframe_index >= frames.frame_count())
        throw ValidationError("OraclePropagator: keyframe index out of range");
    MaskSequence out = empty_sequence(frames);

    // Tight boxes of every object visible at the keyframe.
    std::vector<std::pair<std::int32_t, BoundingBox>> candidates;
    for (std::int32_t label : frames.labels_present()) {
        auto tb = tight_box(frames.label_mask(keyframe_index, label));
        if (tb) candidates.emplace_back(label, *tb);
    }

    for (const auto& box : boxes) {
        std::int32_t best_label = 0;
        double best_iou = 0.0;
        for (const auto& [label, cand] : candidates) {
            double iou = box_iou(box, cand);
            if (iou > best_iou) {
                best_iou = iou;
                best_label = label;
            }
        }
        if (best_label == 0) continue;  // no overlap with any object
        for (int t = 0; t < frames.frame_count(); ++t)
            union_into(out, frames.label_mask(t, best_label), t);
    }
    return out;
}

MaskSequence LabelMapPropagator::propagate(const std::vector<BoundingBox>& boxes,
                                           const SceneFrames& frames, int keyframe_index) const {
    if (keyframe_index < 0 || keyframe_index >= frames.frame_count())
        throw ValidationError("LabelMapPropagator: keyframe index out of range");
    MaskSequence out = empty_sequence(frames);
    const auto& key_labels = frames.label_maps[keyframe_index];

    for (const auto& box : boxes) {
        BinaryMask region = box_to_mask(box, frames.width, frames.height);
        std::map<std::int32_t, int> votes;  // object labels only
        for (std::size_t i = 0; i < region.bits.size(); ++i)
            if (region.bits[i] && key_labels[i] > 0) ++votes[key_labels[i]];
        std::int32_t modal = 0;
        int best = 0;
        for (auto [label, n] : votes) {  // ties resolve to the smaller label
            if (n > best) {
                best = n;
                modal = label;
            }
        }
        if (modal == 0) continue;  // the box covers only background
        for (int t = 0; t < frames.frame_count(); ++t)
            union_into(out, frames.label_mask(t, modal), t);
    }
    return out;
}

double format_reward(const std::string& text) {
    return parse_response(text).ok() ? 1.0 : 0.0;
}

double temporal_reward(int keyframe_index, const GroundTruthSample& gt, bool prediction_empty) {
    if (keyframe_index < 0 || keyframe_index >= gt.frame_count())
        throw ValidationError("temporal_reward: keyframe index out of range");
    auto areas = gt.merged_areas();
    int max_area = *std::max_element(areas.begin(), areas.end());
    if (max_area == 0) return prediction_empty ? 1.0 : 0.0;
    return static_cast<double>(areas[keyframe_index]) / static_cast<double>(max_area);
}

double spatial_reward(const std::vector<BoundingBox>& pred_boxes,
                      const std::vector<BoundingBox>& gt_boxes) {
    if (pred_boxes.empty() && gt_boxes.empty()) return 1.0;
    if (pred_boxes.empty() || gt_boxes.empty()) return 0.0;
    Matrix cost(static_cast<int>(pred_boxes.size()), static_cast<int>(gt_boxes.size()));
    for (int i = 0; i < cost.rows; ++i)
        for (int j = 0; j < cost.cols; ++j)
            cost.at(i, j) = 1.0 - box_iou(pred_boxes[i], gt_boxes[j]);
    Assignment assignment = hungarian(cost);
    double sum = 0.0;
    for (auto [i, j] : assignment.matched_pairs) sum += box_iou(pred_boxes[i], gt_boxes[j]);
    return sum / static_cast<double>(std::max(pred_boxes.size(), gt_boxes.size()));
}

UnifiedResult unified_reward(const std::vector<BoundingBox>& pred_boxes, int keyframe_index,
                             const GroundTruthSample& gt, const SceneFrames& frames,
                             const MaskPropagator& propagator) {
    if (keyframe_index < 0 || keyframe_index >= gt.frame_count())
        throw ValidationError("unified_reward: keyframe index out of range");

    std::vector<BoundingBox> gt_boxes = gt.boxes_at(keyframe_index);
    std::vector<BoundingBox> matched;
    if (!pred_boxes.empty() && !gt_boxes.empty()) {
        Matrix cost(static_cast<int>(pred_boxes.size()), static_cast<int>(gt_boxes.size()));
        for (int i = 0; i < cost.rows; ++i)
            for (int j = 0; j < cost.cols; ++j)
                cost.at(i, j) = 1.0 - box_iou(pred_boxes[i], gt_boxes[j]);
        for (auto [i, j] : hungarian(cost).matched_pairs) matched.push_back(pred_boxes[i]);
    }

    auto areas = gt.merged_areas();
    bool gt_all_empty = *std::max_element(areas.begin(), areas.end()) == 0;
    if (matched.empty()) return {gt_all_empty ? 1.0 : 0.0, std::nullopt};

    MaskSequence propagated;
    try {
        propagated = propagator.propagate(matched, frames, keyframe_index);
    } catch (const std::exception& e) {
        return {0.0, std::string("propagator failure: ") + e.what()};
    }
    if (static_cast<int>(propagated.size()) != gt.frame_count())
        return {0.0, "propagator failure: frame count mismatch"};

    double sum = 0.0;
    for (int t = 0; t < gt.frame_count(); ++t) sum += mask_iou(propagated[t], gt.merged_masks[t]);
    return {sum / gt.frame_count(), std::nullopt};
}

RewardBreakdown total_reward(const std::string& text, const GroundTruthSample& gt,
                             const SceneFrames& frames, const RewardWeights& weights,
                             const MaskPropagator& propagator) {
    RewardBreakdown out;
    ParseResult parsed = parse_response(text);
    if (!parsed.ok()) return out;  // a malformed answer cannot be scored

    const StructuredResponse& r = *parsed.response;
    int keyframe = snap_timestamp(r.keyframe_timestamp, gt.sampled_times);

    out.r_format = 1.0;
    out.r_temporal = temporal_reward(keyframe, gt, r.boxes.empty());
    out.r_spatial = spatial_reward(r.boxes, gt.boxes_at(keyframe));
    UnifiedResult u = unified_reward(r.boxes, keyframe, gt, frames, propagator);
    out.r_unified = u.value;
    out.diagnostic = u.diagnostic;
    out.r_total = weights.alpha_f * out.r_format + weights.alpha_k * out.r_temporal +
                  weights.alpha_s * out.r_spatial + weights.alpha_u * out.r_unified;
    return out;
}

}  // namespace veason
