#include "veason/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "veason/errors.hpp"
#include "veason/rng.hpp"

namespace veason {

namespace {

constexpr std::array<std::string_view, 8> kPalette = {
    "red", "green", "blue", "yellow", "purple", "orange", "cyan", "magenta"};
constexpr int kObjectColors = 6;  // colors drawn for objects; the rest stay free for negatives

constexpr std::string_view kCanonicalThink =
    "Scanning the sampled frames for the referred target, it is most clearly visible at the "
    "chosen timestamp, where I ground each instance with a tight box.";

}  // namespace

std::string_view color_name(int color_id) {
    if (color_id < 0 || color_id >= static_cast<int>(kPalette.size()))
        throw ValidationError("color_name: unknown color id");
    return kPalette[color_id];
}

std::string_view to_string(ShapeKind s) {
    return s == ShapeKind::Rectangle ? "rectangle" : "ellipse";
}

std::string_view to_string(SelectorKind s) {
    switch (s) {
        case SelectorKind::ByColor: return "by_color";
        case SelectorKind::Largest: return "largest";
        case SelectorKind::Fastest: return "fastest";
        case SelectorKind::Leftmost: return "leftmost";
        case SelectorKind::None: return "none";
    }
    return "unknown";
}

void EnvConfig::validate() const {
    if (n_videos < 1) throw ValidationError("env.n_videos must be >= 1");
    if (!(negative_fraction >= 0 && negative_fraction <= 1))
        throw ValidationError("env.negative_fraction must be in [0, 1]");
    if (frames < 2) throw ValidationError("env.frames must be >= 2");
    if (!(frame_stride > 0)) throw ValidationError("env.frame_stride must be > 0");
    if (width < 8 || height < 8) throw ValidationError("env.width/height must be >= 8");
    if (grid < 1) throw ValidationError("env.grid must be >= 1");
    if (size_bins < 1) throw ValidationError("env.size_bins must be >= 1");
    if (!(noise >= 0)) throw ValidationError("env.noise must be >= 0");
    if (min_objects < 1 || max_objects < min_objects)
        throw ValidationError("env.min_objects/max_objects are inconsistent");
    if (!(min_size > 0) || max_size < min_size)
        throw ValidationError("env.min_size/max_size are inconsistent");
    if (!(min_speed >= 0) || max_speed < min_speed)
        throw ValidationError("env.min_speed/max_speed are inconsistent");
    if (max_occluders < 0) throw ValidationError("env.max_occluders must be >= 0");
}

SceneFrames rasterize_scene(const SyntheticVideo& v) {
    SceneFrames out;
    out.width = v.width;
    out.height = v.height;
    out.label_maps.resize(v.sampled_times.size());
    for (std::size_t t = 0; t < v.sampled_times.size(); ++t) {
        auto& lm = out.label_maps[t];
        lm.assign(static_cast<std::size_t>(v.width) * v.height, 0);
        double time = v.sampled_times[t];
        for (const ObjectTrack& obj : v.objects) {
            double cx = obj.start_x + obj.vx * time;
            double cy = obj.start_y + obj.vy * time;
            if (obj.shape == ShapeKind::Rectangle) {
                BoundingBox b{cx - obj.size / 2, cy - obj.size / 2, cx + obj.size / 2,
                              cy + obj.size / 2};
                BinaryMask m = box_to_mask(b, v.width, v.height);
                for (std::size_t i = 0; i < m.bits.size(); ++i)
                    if (m.bits[i]) lm[i] = obj.object_id;
            } else {
                double a = obj.size / 2, b = obj.size * 0.4;
                int x_lo = std::max(0, static_cast<int>(std::floor(cx - a)));
                int x_hi = std::min(v.width - 1, static_cast<int>(std::ceil(cx + a)));
                int y_lo = std::max(0, static_cast<int>(std::floor(cy - b)));
                int y_hi = std::min(v.height - 1, static_cast<int>(std::ceil(cy + b)));
                for (int y = y_lo; y <= y_hi; ++y) {
                    for (int x = x_lo; x <= x_hi; ++x) {
                        double dx = (x + 0.5 - cx) / a, dy = (y + 0.5 - cy) / b;
                        if (dx * dx + dy * dy <= 1.0)
                            lm[static_cast<std::size_t>(y) * v.width + x] = obj.object_id;
                    }
                }
            }
        }
        for (const BoundingBox& occ : v.occluders) {
            BinaryMask m = box_to_mask(occ, v.width, v.height);
            for (std::size_t i = 0; i < m.bits.size(); ++i)
                if (m.bits[i]) lm[i] = 0;
        }
    }
    return out;
}

std::vector<int> select_objects(const Query& q, const SyntheticVideo& v) {
    std::vector<int> out;
    auto argbest = [&](auto key, bool maximize) {
        const ObjectTrack* best = nullptr;
        for (const ObjectTrack& o : v.objects) {
            if (!best) {
                best = &o;
                continue;
            }
            double a = key(o), b = key(*best);
            if (maximize ? a > b : a < b) best = &o;
        }
        if (best) out.push_back(best->object_id);
    };
    switch (q.kind) {
        case SelectorKind::ByColor:
            for (const ObjectTrack& o : v.objects)
                if (o.color_id == q.color_id) out.push_back(o.object_id);
            break;
        case SelectorKind::Largest:
            argbest([](const ObjectTrack& o) { return o.size; }, true);
            break;
        case SelectorKind::Fastest:
            argbest([](const ObjectTrack& o) { return std::hypot(o.vx, o.vy); }, true);
            break;
        case SelectorKind::Leftmost:
            argbest([](const ObjectTrack& o) { return o.start_x; }, false);
            break;
        case SelectorKind::None:
            break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

GroundTruthSample build_ground_truth(const SyntheticVideo& v, const SceneFrames& frames,
                                     const std::vector<int>& object_ids) {
    GroundTruthSample gt;
    gt.sampled_times = v.sampled_times;
    gt.object_ids = object_ids;
    int t_count = static_cast<int>(v.sampled_times.size());
    gt.object_masks.resize(t_count);
    gt.object_boxes.resize(t_count);
    gt.merged_masks.assign(t_count, BinaryMask(v.width, v.height));
    for (int t = 0; t < t_count; ++t) {
        for (int id : object_ids) {
            BinaryMask m = frames.label_mask(t, id);
            gt.object_boxes[t].push_back(tight_box(m));
            for (std::size_t i = 0; i < m.bits.size(); ++i)
                gt.merged_masks[t].bits[i] |= m.bits[i];
            gt.object_masks[t].push_back(std::move(m));
        }
    }
    return gt;
}

namespace {

std::string render_query_text(SelectorKind kind, std::optional<int> color) {
    switch (kind) {
        case SelectorKind::ByColor:
        case SelectorKind::None:
            return "the " + std::string(color_name(*color)) + " object";
        case SelectorKind::Largest: return "the largest object";
        case SelectorKind::Fastest: return "the fastest-moving object";
        case SelectorKind::Leftmost: return "the object starting furthest to the left";
    }
    return {};
}

SyntheticVideo draw_video(Rng& rng, const EnvConfig& cfg, std::size_t index) {
    SyntheticVideo v;
    v.video_id = "v" + std::to_string(index);
    v.width = cfg.width;
    v.height = cfg.height;
    for (int t = 0; t < cfg.frames; ++t) v.sampled_times.push_back(t * cfg.frame_stride);

    int n_obj = cfg.min_objects +
                static_cast<int>(rng.next_below(cfg.max_objects - cfg.min_objects + 1));

    // Mostly distinct colors; an occasional duplicate pair makes color queries
    // select several objects at once.
    std::vector<int> colors(kObjectColors);
    std::iota(colors.begin(), colors.end(), 0);
    for (std::size_t i = colors.size(); i > 1; --i)
        std::swap(colors[i - 1], colors[rng.next_below(i)]);
    colors.resize(n_obj);
    if (n_obj >= 2 && rng.next_double() < 0.2)
        colors[rng.next_below(n_obj)] = colors[rng.next_below(n_obj)];

    for (int o = 1; o <= n_obj; ++o) {
        ObjectTrack obj;
        obj.object_id = o;
        obj.shape = rng.next_below(2) == 0 ? ShapeKind::Rectangle : ShapeKind::Ellipse;
        obj.color_id = colors[o - 1];
        obj.size = rng.next_range(cfg.min_size, cfg.max_size);
        // both axes always drift so the centroid sweeps several grid cells
        obj.vx = (rng.next_below(2) ? 1 : -1) * rng.next_range(cfg.min_speed, cfg.max_speed);
        obj.vy = (rng.next_below(2) ? 1 : -1) * rng.next_range(cfg.min_speed, cfg.max_speed);
        double margin = obj.size / 2 + 2;
        obj.start_x = rng.next_range(margin, cfg.width - margin);
        obj.start_y = rng.next_range(margin, cfg.height - margin);
        v.objects.push_back(obj);
    }

    int n_occ = static_cast<int>(rng.next_below(cfg.max_occluders + 1));
    for (int i = 0; i < n_occ; ++i) {
        double thickness = rng.next_range(4, 8);
        if (rng.next_below(2) == 0) {
            double x = rng.next_range(0, cfg.width - thickness);
            v.occluders.push_back({x, 0, x + thickness, static_cast<double>(cfg.height)});
        } else {
            double y = rng.next_range(0, cfg.height - thickness);
            v.occluders.push_back({0, y, static_cast<double>(cfg.width), y + thickness});
        }
    }
    return v;
}

Query draw_query(Rng& rng, const SyntheticVideo& v, bool negative) {
    Query q;
    if (negative) {
        std::vector<int> absent;
        for (int c = 0; c < static_cast<int>(kPalette.size()); ++c) {
            bool used = false;
            for (const ObjectTrack& o : v.objects) used |= o.color_id == c;
            if (!used) absent.push_back(c);
        }
        q.kind = SelectorKind::None;
        q.color_id = absent[rng.next_below(absent.size())];
    } else {
        switch (rng.next_below(4)) {
            case 0: {
                q.kind = SelectorKind::ByColor;
                const ObjectTrack& pick = v.objects[rng.next_below(v.objects.size())];
                q.color_id = pick.color_id;
                break;
            }
            case 1: q.kind = SelectorKind::Largest; break;
            case 2: q.kind = SelectorKind::Fastest; break;
            default: q.kind = SelectorKind::Leftmost; break;
        }
    }
    q.expression_text = render_query_text(q.kind, q.color_id);
    return q;
}

std::string subset_of(SelectorKind kind) {
    switch (kind) {
        case SelectorKind::ByColor:
        case SelectorKind::Leftmost: return "referring";
        case SelectorKind::Largest:
        case SelectorKind::Fastest: return "reasoning";
        case SelectorKind::None: return "negative";
    }
    return "referring";
}

// Frames where the object is whole: fully inside the frame and hidden by
// neither occluders nor other objects.
int clean_frame_count(const Sample& s, int id) {
    const ObjectTrack* obj = nullptr;
    for (const ObjectTrack& o : s.video.objects)
        if (o.object_id == id) obj = &o;
    SyntheticVideo solo;
    solo.width = s.video.width;
    solo.height = s.video.height;
    solo.sampled_times = s.video.sampled_times;
    solo.objects = {*obj};
    SceneFrames alone = rasterize_scene(solo);

    int clean = 0;
    for (int t = 0; t < s.frames.frame_count(); ++t) {
        double time = s.video.sampled_times[t];
        double cx = obj->start_x + obj->vx * time;
        double cy = obj->start_y + obj->vy * time;
        double half_w = obj->size / 2;
        double half_h = obj->shape == ShapeKind::Rectangle ? obj->size / 2 : obj->size * 0.4;
        bool inside = cx - half_w >= 0 && cx + half_w <= s.video.width && cy - half_h >= 0 &&
                      cy + half_h <= s.video.height;
        if (!inside) continue;
        int visible = mask_area(s.frames.label_mask(t, id));
        int solo_area = mask_area(alone.label_mask(t, id));
        if (solo_area > 0 && visible == solo_area) ++clean;
    }
    return clean;
}

bool valid_positive(const Sample& s) {
    if (s.gt.object_ids.empty()) return false;
    for (int id : s.gt.object_ids)
        if (clean_frame_count(s, id) < 3) return false;
    auto areas = s.gt.merged_areas();
    if (*std::max_element(areas.begin(), areas.end()) == 0) return false;
    // The generated data must admit a perfect answer.
    std::string text = serialize_response(canonical_ground_truth_response(s));
    RewardBreakdown r = total_reward(text, s.gt, s.frames, RewardWeights{}, OraclePropagator{});
    return r.r_total == 4.0;
}

}  // namespace

StructuredResponse canonical_ground_truth_response(const Sample& s) {
    StructuredResponse r;
    r.think_text = std::string(kCanonicalThink);
    if (s.negative()) {
        r.keyframe_timestamp = s.gt.sampled_times.front();
        return r;
    }
    auto areas = s.gt.merged_areas();
    int best = 0;
    for (int t = 1; t < static_cast<int>(areas.size()); ++t)
        if (areas[t] > areas[best]) best = t;
    r.keyframe_timestamp = s.gt.sampled_times[best];
    r.boxes = s.gt.boxes_at(best);
    return r;
}

Dataset generate_dataset(std::uint64_t seed, const EnvConfig& config) {
    config.validate();
    Dataset ds;
    ds.seed = seed;
    ds.config = config;

    // Deterministic negative slots: the first round(n * fraction) positions of
    // a seeded permutation.
    std::size_t n = static_cast<std::size_t>(config.n_videos);
    std::size_t n_neg = static_cast<std::size_t>(
        std::llround(config.negative_fraction * static_cast<double>(n)));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng neg_rng = Rng::stream(seed, "negatives");
    for (std::size_t i = n; i > 1; --i)
        std::swap(perm[i - 1], perm[neg_rng.next_below(i)]);
    std::vector<bool> negative(n, false);
    for (std::size_t i = 0; i < n_neg; ++i) negative[perm[i]] = true;

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, "video", i);
        Sample s;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            s = Sample{};
            s.index = i;
            char buf[32];
            std::snprintf(buf, sizeof buf, "s%04llu", static_cast<unsigned long long>(i));
            s.sample_id = buf;
            s.video = draw_video(rng, config, i);
            s.query = draw_query(rng, s.video, negative[i]);
            s.subset = subset_of(s.query.kind);
            s.frames = rasterize_scene(s.video);
            s.gt = build_ground_truth(s.video, s.frames, select_objects(s.query, s.video));
            if (negative[i] || valid_positive(s)) break;
            if (attempt == 999)
                throw NumericalError("generate_dataset: no valid scene after 1000 attempts");
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

int features_per_frame(const EnvConfig& cfg) { return 6 + cfg.grid * cfg.grid; }

std::vector<double> observe(const Dataset& ds, std::size_t sample_index) {
    const Sample& s = ds.samples.at(sample_index);
    const EnvConfig& cfg = ds.config;
    int fpf = features_per_frame(cfg);
    int t_count = s.gt.frame_count();
    std::vector<double> features(static_cast<std::size_t>(t_count) * fpf, 0.0);

    int max_area = 0;
    for (const BinaryMask& m : s.gt.merged_masks) max_area = std::max(max_area, mask_area(m));

    double prev_cx = 0.5, prev_cy = 0.5;
    bool prev_visible = false;
    for (int t = 0; t < t_count; ++t) {
        const BinaryMask& m = s.gt.merged_masks[t];
        int area = mask_area(m);
        double* f = features.data() + static_cast<std::size_t>(t) * fpf;
        double cx = 0.5, cy = 0.5;
        if (area > 0) {
            double sx = 0, sy = 0;
            for (int y = 0; y < m.height; ++y)
                for (int x = 0; x < m.width; ++x)
                    if (m.at(x, y)) {
                        sx += x + 0.5;
                        sy += y + 0.5;
                    }
            cx = sx / area / cfg.width;
            cy = sy / area / cfg.height;
        }
        // roughly unit-scale features so no head is starved of signal
        f[0] = static_cast<double>(area) / (0.05 * cfg.width * cfg.height);
        f[1] = std::sqrt(static_cast<double>(area)) / (0.2 * cfg.width);
        f[2] = cx;
        f[3] = cy;
        if (prev_visible && area > 0) {
            f[4] = (cx - prev_cx) * 8;
            f[5] = (cy - prev_cy) * 8;
        }
        if (area > 0) {
            // centroid cell one-hot, weighted by the frame's relative area so
            // prominent frames dominate the cell head's view
            int gx = std::min(cfg.grid - 1, static_cast<int>(cx * cfg.grid));
            int gy = std::min(cfg.grid - 1, static_cast<int>(cy * cfg.grid));
            f[6 + gy * cfg.grid + gx] = 4.0 * area / max_area;
        }
        prev_cx = cx;
        prev_cy = cy;
        prev_visible = area > 0;
    }

    if (cfg.noise > 0) {
        Rng rng = Rng::stream(ds.seed, "obs", sample_index);
        for (double& v : features) v += cfg.noise * rng.next_normal();
    }
    return features;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json config_to_json(const EnvConfig& c) {
    ordered_json j;
    j["n_videos"] = c.n_videos;
    j["negative_fraction"] = c.negative_fraction;
    j["frames"] = c.frames;
    j["frame_stride"] = c.frame_stride;
    j["width"] = c.width;
    j["height"] = c.height;
    j["grid"] = c.grid;
    j["size_bins"] = c.size_bins;
    j["noise"] = c.noise;
    j["min_objects"] = c.min_objects;
    j["max_objects"] = c.max_objects;
    j["min_size"] = c.min_size;
    j["max_size"] = c.max_size;
    j["min_speed"] = c.min_speed;
    j["max_speed"] = c.max_speed;
    j["max_occluders"] = c.max_occluders;
    return j;
}

EnvConfig config_from_json(const nlohmann::json& j) {
    EnvConfig c;
    c.n_videos = j.at("n_videos").get<int>();
    c.negative_fraction = j.at("negative_fraction").get<double>();
    c.frames = j.at("frames").get<int>();
    c.frame_stride = j.at("frame_stride").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.grid = j.at("grid").get<int>();
    c.size_bins = j.at("size_bins").get<int>();
    c.noise = j.at("noise").get<double>();
    c.min_objects = j.at("min_objects").get<int>();
    c.max_objects = j.at("max_objects").get<int>();
    c.min_size = j.at("min_size").get<double>();
    c.max_size = j.at("max_size").get<double>();
    c.min_speed = j.at("min_speed").get<double>();
    c.max_speed = j.at("max_speed").get<double>();
    c.max_occluders = j.at("max_occluders").get<int>();
    return c;
}

ordered_json box_to_json(const BoundingBox& b) {
    return ordered_json::array({b.x1, b.y1, b.x2, b.y2});
}

BoundingBox box_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) throw ValidationError("manifest: bad box");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

ordered_json rle_json_object(const BinaryMask& m) {
    RleMask r = rle_encode(m);
    ordered_json j;
    j["w"] = r.width;
    j["h"] = r.height;
    j["counts"] = r.counts;
    return j;
}

BinaryMask mask_from_json(const nlohmann::json& j) {
    RleMask r;
    r.width = j.at("w").get<int>();
    r.height = j.at("h").get<int>();
    for (const auto& c : j.at("counts")) r.counts.push_back(c.get<std::uint64_t>());
    return rle_decode(r);
}

}  // namespace

void write_manifest(const Dataset& ds, const std::filesystem::path& path) {
    ordered_json root;
    root["seed"] = ds.seed;
    root["config"] = config_to_json(ds.config);
    auto samples = ordered_json::array();
    for (const Sample& s : ds.samples) {
        ordered_json js;
        js["sample_id"] = s.sample_id;
        js["subset"] = s.subset;

        ordered_json jv;
        jv["video_id"] = s.video.video_id;
        jv["width"] = s.video.width;
        jv["height"] = s.video.height;
        auto objects = ordered_json::array();
        for (const ObjectTrack& o : s.video.objects) {
            ordered_json jo;
            jo["id"] = o.object_id;
            jo["shape"] = to_string(o.shape);
            jo["color"] = o.color_id;
            jo["size"] = o.size;
            jo["velocity"] = ordered_json::array({o.vx, o.vy});
            jo["start"] = ordered_json::array({o.start_x, o.start_y});
            objects.push_back(std::move(jo));
        }
        jv["objects"] = std::move(objects);
        auto occluders = ordered_json::array();
        for (const BoundingBox& b : s.video.occluders) occluders.push_back(box_to_json(b));
        jv["occluders"] = std::move(occluders);
        js["video"] = std::move(jv);

        ordered_json jq;
        jq["selector"] = to_string(s.query.kind);
        if (s.query.color_id) jq["color"] = *s.query.color_id;
        jq["text"] = s.query.expression_text;
        js["query"] = std::move(jq);

        js["sampled_times"] = s.gt.sampled_times;

        ordered_json jg;
        jg["object_ids"] = s.gt.object_ids;
        auto frames = ordered_json::array();
        for (int t = 0; t < s.gt.frame_count(); ++t) {
            ordered_json jf;
            auto masks = ordered_json::array();
            auto boxes = ordered_json::array();
            for (std::size_t o = 0; o < s.gt.object_ids.size(); ++o) {
                masks.push_back(rle_json_object(s.gt.object_masks[t][o]));
                if (s.gt.object_boxes[t][o])
                    boxes.push_back(box_to_json(*s.gt.object_boxes[t][o]));
                else
                    boxes.push_back(nullptr);
            }
            jf["masks"] = std::move(masks);
            jf["boxes"] = std::move(boxes);
            frames.push_back(std::move(jf));
        }
        jg["frames"] = std::move(frames);
        js["gt"] = std::move(jg);
        samples.push_back(std::move(js));
    }
    root["samples"] = std::move(samples);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << root.dump(1) << "\n";
}

Dataset load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json root = nlohmann::json::parse(in, nullptr, false);
    if (root.is_discarded()) throw ValidationError("manifest: invalid JSON");

    Dataset ds;
    try {
        ds.seed = root.at("seed").get<std::uint64_t>();
        ds.config = config_from_json(root.at("config"));
        std::size_t index = 0;
        for (const auto& js : root.at("samples")) {
            Sample s;
            s.sample_id = js.at("sample_id").get<std::string>();
            s.index = index++;
            s.subset = js.at("subset").get<std::string>();

            const auto& jv = js.at("video");
            s.video.video_id = jv.at("video_id").get<std::string>();
            s.video.width = jv.at("width").get<int>();
            s.video.height = jv.at("height").get<int>();
            for (const auto& jo : jv.at("objects")) {
                ObjectTrack o;
                o.object_id = jo.at("id").get<int>();
                o.shape = jo.at("shape").get<std::string>() == "rectangle" ? ShapeKind::Rectangle
                                                                           : ShapeKind::Ellipse;
                o.color_id = jo.at("color").get<int>();
                o.size = jo.at("size").get<double>();
                o.vx = jo.at("velocity")[0].get<double>();
                o.vy = jo.at("velocity")[1].get<double>();
                o.start_x = jo.at("start")[0].get<double>();
                o.start_y = jo.at("start")[1].get<double>();
                s.video.objects.push_back(o);
            }
            for (const auto& jb : jv.at("occluders")) s.video.occluders.push_back(box_from_json(jb));

            const auto& jq = js.at("query");
            std::string sel = jq.at("selector").get<std::string>();
            if (sel == "by_color") s.query.kind = SelectorKind::ByColor;
            else if (sel == "largest") s.query.kind = SelectorKind::Largest;
            else if (sel == "fastest") s.query.kind = SelectorKind::Fastest;
            else if (sel == "leftmost") s.query.kind = SelectorKind::Leftmost;
            else if (sel == "none") s.query.kind = SelectorKind::None;
            else throw ValidationError("manifest: unknown selector " + sel);
            if (jq.contains("color")) s.query.color_id = jq.at("color").get<int>();
            s.query.expression_text = jq.at("text").get<std::string>();

            s.video.sampled_times = js.at("sampled_times").get<std::vector<double>>();
            s.frames = rasterize_scene(s.video);

            const auto& jg = js.at("gt");
            s.gt.sampled_times = s.video.sampled_times;
            s.gt.object_ids = jg.at("object_ids").get<std::vector<int>>();
            for (const auto& jf : jg.at("frames")) {
                std::vector<BinaryMask> masks;
                std::vector<std::optional<BoundingBox>> boxes;
                for (const auto& jm : jf.at("masks")) masks.push_back(mask_from_json(jm));
                for (const auto& jb : jf.at("boxes")) {
                    if (jb.is_null())
                        boxes.emplace_back(std::nullopt);
                    else
                        boxes.emplace_back(box_from_json(jb));
                }
                BinaryMask merged(s.video.width, s.video.height);
                for (const BinaryMask& m : masks)
                    for (std::size_t i = 0; i < m.bits.size(); ++i) merged.bits[i] |= m.bits[i];
                s.gt.object_masks.push_back(std::move(masks));
                s.gt.object_boxes.push_back(std::move(boxes));
                s.gt.merged_masks.push_back(std::move(merged));
            }
            s.gt.validate();
            ds.samples.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
    return ds;
}

}  // namespace veason
