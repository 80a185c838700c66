#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "veason/geometry.hpp"
#include "veason/response.hpp"

namespace veason {

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
};

// One-to-one assignment of size min(rows, cols) minimizing total cost. Among
// equal-cost optima the pair list is the lexicographically smallest, pairs
// sorted by row index.
struct Assignment {
    std::vector<std::pair<int, int>> matched_pairs;
    Matrix cost_matrix;

    double total_cost() const;
};

Assignment hungarian(const Matrix& cost);

namespace detail {
// Bitmask DP over the smaller dimension; exact and lexicographically tie-broken.
std::vector<std::pair<int, int>> assign_small_exact(const Matrix& cost);
// O(n^3) potentials method for matrices too large for the DP.
std::vector<std::pair<int, int>> assign_potentials(const Matrix& cost);
}  // namespace detail

// Ground truth for one sample over the T sampled frames. Boxes are the tight
// boxes of the corresponding masks, absent where a mask is empty.
struct GroundTruthSample {
    std::vector<double> sampled_times;
    std::vector<int> object_ids;
    std::vector<std::vector<BinaryMask>> object_masks;                // [frame][object]
    std::vector<std::vector<std::optional<BoundingBox>>> object_boxes;  // [frame][object]
    std::vector<BinaryMask> merged_masks;                             // [frame]

    int frame_count() const { return static_cast<int>(sampled_times.size()); }
    std::vector<BoundingBox> boxes_at(int frame) const;
    std::vector<int> merged_areas() const;
    void validate() const;
};

// Per-frame instance label maps: the visual content a propagator may consult.
// 0 is background; occluded pixels are background.
struct SceneFrames {
    int width = 0;
    int height = 0;
    std::vector<std::vector<std::int32_t>> label_maps;  // [frame][width*height]

    int frame_count() const { return static_cast<int>(label_maps.size()); }
    BinaryMask label_mask(int frame, std::int32_t label) const;
    std::vector<std::int32_t> labels_present() const;
};

// Extends keyframe boxes into a full per-frame mask sequence (one mask per
// frame, unioned across boxes).
class MaskPropagator {
public:
    virtual ~MaskPropagator() = default;
    virtual MaskSequence propagate(const std::vector<BoundingBox>& boxes,
                                   const SceneFrames& frames, int keyframe_index) const = 0;
};

// For each box, emits the full track of the object whose keyframe tight box
// has the highest positive IoU with it (ties: lowest object id). Boxes that
// overlap no object emit nothing.
class OraclePropagator final : public MaskPropagator {
public:
    MaskSequence propagate(const std::vector<BoundingBox>& boxes, const SceneFrames& frames,
                           int keyframe_index) const override;
};

// For each box, takes the object label most frequent among the pixels the box
// covers at the keyframe and emits that label's pixels in every frame. Boxes
// covering only background emit nothing.
class LabelMapPropagator final : public MaskPropagator {
public:
    MaskSequence propagate(const std::vector<BoundingBox>& boxes, const SceneFrames& frames,
                           int keyframe_index) const override;
};

struct RewardWeights {
    double alpha_f = 1.0;
    double alpha_k = 1.0;
    double alpha_s = 1.0;
    double alpha_u = 1.0;
};

struct RewardBreakdown {
    double r_format = 0;
    double r_temporal = 0;
    double r_spatial = 0;
    double r_unified = 0;
    double r_total = 0;
    std::optional<std::string> diagnostic;
};

// 1 iff the text parses as a structured response.
double format_reward(const std::string& text);

// Merged foreground area at the keyframe over the maximum across frames.
// When the target is absent from every frame: 1 for an empty prediction, 0
// otherwise.
double temporal_reward(int keyframe_index, const GroundTruthSample& gt, bool prediction_empty);

// Hungarian-matched IoU sum normalized by max(|pred|, |gt|). Both lists empty
// -> 1, exactly one empty -> 0.
double spatial_reward(const std::vector<BoundingBox>& pred_boxes,
                      const std::vector<BoundingBox>& gt_boxes);

struct UnifiedResult {
    double value = 0;
    std::optional<std::string> diagnostic;
};

// Match predicted boxes to ground-truth boxes at the keyframe, propagate the
// matched boxes, and average per-frame IoU against the merged ground truth.
// Propagator failures score 0 with a diagnostic instead of throwing.
UnifiedResult unified_reward(const std::vector<BoundingBox>& pred_boxes, int keyframe_index,
                             const GroundTruthSample& gt, const SceneFrames& frames,
                             const MaskPropagator& propagator);

// All four sub-rewards and their weighted sum. A response that fails to parse
// zeroes every sub-reward.
RewardBreakdown total_reward(const std::string& text, const GroundTruthSample& gt,
                             const SceneFrames& frames, const RewardWeights& weights,
                             const MaskPropagator& propagator);

}  // namespace veason
