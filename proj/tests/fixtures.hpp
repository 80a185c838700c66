#pragma once

// Hand-built scenes for reward tests: solid rectangle objects on small
// canvases, ground truth derived exactly as the environment derives it.

#include <optional>
#include <vector>

#include "veason/geometry.hpp"
#include "veason/rewards.hpp"

namespace veason::testing {

struct FixtureScene {
    SceneFrames frames;
    GroundTruthSample gt;
};

// boxes_per_frame[t][o] places object o+1 at frame t (nullopt = absent).
// Objects are painted in id order, so later objects win overlaps.
inline FixtureScene make_scene(int width, int height,
                               const std::vector<std::vector<std::optional<BoundingBox>>>&
                                   boxes_per_frame,
                               std::vector<double> times) {
    FixtureScene fs;
    fs.frames.width = width;
    fs.frames.height = height;
    std::size_t n_objects = boxes_per_frame.empty() ? 0 : boxes_per_frame[0].size();
    for (const auto& frame : boxes_per_frame) {
        std::vector<std::int32_t> lm(static_cast<std::size_t>(width) * height, 0);
        for (std::size_t o = 0; o < frame.size(); ++o) {
            if (!frame[o]) continue;
            BinaryMask m = box_to_mask(*frame[o], width, height);
            for (std::size_t i = 0; i < m.bits.size(); ++i)
                if (m.bits[i]) lm[i] = static_cast<std::int32_t>(o + 1);
        }
        fs.frames.label_maps.push_back(std::move(lm));
    }

    fs.gt.sampled_times = std::move(times);
    for (std::size_t o = 0; o < n_objects; ++o)
        fs.gt.object_ids.push_back(static_cast<int>(o + 1));
    for (int t = 0; t < fs.frames.frame_count(); ++t) {
        std::vector<BinaryMask> masks;
        std::vector<std::optional<BoundingBox>> boxes;
        BinaryMask merged(width, height);
        for (std::size_t o = 0; o < n_objects; ++o) {
            BinaryMask m = fs.frames.label_mask(t, static_cast<std::int32_t>(o + 1));
            boxes.push_back(tight_box(m));
            for (std::size_t i = 0; i < m.bits.size(); ++i) merged.bits[i] |= m.bits[i];
            masks.push_back(std::move(m));
        }
        fs.gt.object_masks.push_back(std::move(masks));
        fs.gt.object_boxes.push_back(std::move(boxes));
        fs.gt.merged_masks.push_back(std::move(merged));
    }
    return fs;
}

// Always returns all-empty masks.
struct EmptyPropagator final : MaskPropagator {
    MaskSequence propagate(const std::vector<BoundingBox>&, const SceneFrames& frames,
                           int) const override {
        return MaskSequence(frames.frame_count(), BinaryMask(frames.width, frames.height));
    }
};

// Always throws, for the failure path.
struct FailingPropagator final : MaskPropagator {
    MaskSequence propagate(const std::vector<BoundingBox>&, const SceneFrames&,
                           int) const override {
        throw std::runtime_error("propagation backend unavailable");
    }
};

}  // namespace veason::testing
