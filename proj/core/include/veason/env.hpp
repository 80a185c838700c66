#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "veason/response.hpp"
#include "veason/rewards.hpp"

namespace veason {

enum class ShapeKind { Rectangle, Ellipse };

// Constant-velocity object; the center at time t is start + velocity * t.
struct ObjectTrack {
    int object_id = 0;
    ShapeKind shape = ShapeKind::Rectangle;
    int color_id = 0;
    double size = 0;  // pixels, across the major axis
    double vx = 0, vy = 0;
    double start_x = 0, start_y = 0;
};

struct SyntheticVideo {
    std::string video_id;
    int width = 64, height = 64;
    std::vector<double> sampled_times;
    std::vector<ObjectTrack> objects;
    std::vector<BoundingBox> occluders;  // static bars drawn over everything
};

enum class SelectorKind { ByColor, Largest, Fastest, Leftmost, None };

// Symbolic query rendered to text. None carries a palette color absent from
// the scene and selects nothing (a negative sample).
struct Query {
    SelectorKind kind = SelectorKind::ByColor;
    std::optional<int> color_id;
    std::string expression_text;
};

struct EnvConfig {
    int n_videos = 200;
    double negative_fraction = 0.15;
    int frames = 8;
    double frame_stride = 1.0;  // seconds between sampled frames
    int width = 64;
    int height = 64;
    int grid = 8;       // box-center cells per side for the toy policy
    int size_bins = 4;  // box-size bins for the toy policy
    double noise = 0.05;
    int min_objects = 2;
    int max_objects = 3;
    double min_size = 14;
    double max_size = 21;
    double min_speed = 0.7;  // per-axis velocity magnitude bounds, pixels/s
    double max_speed = 2.2;
    int max_occluders = 2;

    void validate() const;
};

struct Sample {
    std::string sample_id;
    std::size_t index = 0;
    std::string subset;  // referring | reasoning | negative
    SyntheticVideo video;
    Query query;
    GroundTruthSample gt;
    SceneFrames frames;

    bool negative() const { return subset == "negative"; }
};

struct Dataset {
    std::uint64_t seed = 0;
    EnvConfig config;
    std::vector<Sample> samples;
};

std::string_view color_name(int color_id);
std::string_view to_string(ShapeKind s);
std::string_view to_string(SelectorKind s);

// Per-frame instance label maps: objects painted in id order (higher ids on
// top), occluder pixels cleared to background.
SceneFrames rasterize_scene(const SyntheticVideo& v);

std::vector<int> select_objects(const Query& q, const SyntheticVideo& v);

GroundTruthSample build_ground_truth(const SyntheticVideo& v, const SceneFrames& frames,
                                     const std::vector<int>& object_ids);

// Deterministic in (seed, config). Positive samples are regenerated until the
// canonical ground-truth response scores a perfect total with the oracle
// propagator, so the generated data admits a perfect policy.
Dataset generate_dataset(std::uint64_t seed, const EnvConfig& config);

// Earliest maximum-area keyframe with that frame's ground-truth boxes;
// first timestamp and no boxes for negatives.
StructuredResponse canonical_ground_truth_response(const Sample& s);

// Observation features: per frame [area, sqrt(area), centroid x/y, centroid
// deltas, K*K centroid-cell one-hot], all normalized, plus seeded Gaussian
// noise. Fixed per sample: repeated calls return identical vectors.
int features_per_frame(const EnvConfig& cfg);
std::vector<double> observe(const Dataset& ds, std::size_t sample_index);

void write_manifest(const Dataset& ds, const std::filesystem::path& path);
Dataset load_manifest(const std::filesystem::path& path);

}  // namespace veason
