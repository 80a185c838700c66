#include "veason/response.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "veason/errors.hpp"

namespace veason {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::size_t skip_ws(std::string_view s, std::size_t pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos;
}

ParseResult fail(FormatFailure f) { return {std::nullopt, FormatVerdict::fail(f)}; }

// "3", "3.25" or either with a trailing "s"; no sign, no inner whitespace.
std::optional<double> parse_timestamp_string(std::string_view s) {
    if (!s.empty() && s.back() == 's') s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    bool seen_dot = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            if (seen_dot || i == 0 || i + 1 == s.size()) return std::nullopt;
            seen_dot = true;
        } else if (!std::isdigit(static_cast<unsigned char>(c))) {
            return std::nullopt;
        }
    }
    return std::strtod(std::string(s).c_str(), nullptr);
}

}  // namespace

std::string_view to_string(FormatFailure f) {
    switch (f) {
        case FormatFailure::MissingThink: return "MissingThink";
        case FormatFailure::MissingAnswer: return "MissingAnswer";
        case FormatFailure::BadOrder: return "BadOrder";
        case FormatFailure::BadPayload: return "BadPayload";
        case FormatFailure::BadBox: return "BadBox";
        case FormatFailure::BadTimestamp: return "BadTimestamp";
        case FormatFailure::ExtraContent: return "ExtraContent";
    }
    return "Unknown";
}

ParseResult parse_response(std::string_view text) {
    std::size_t pos = skip_ws(text, 0);

    // The document must open with the think block.
    if (text.compare(pos, kThinkOpen.size(), kThinkOpen) != 0) {
        bool think_somewhere = text.find(kThinkOpen) != std::string_view::npos;
        if (text.compare(pos, kAnswerOpen.size(), kAnswerOpen) == 0 && think_somewhere)
            return fail(FormatFailure::BadOrder);
        if (!think_somewhere) return fail(FormatFailure::MissingThink);
        return fail(FormatFailure::ExtraContent);
    }
    std::size_t think_start = pos + kThinkOpen.size();
    std::size_t think_end = text.find(kThinkClose, think_start);
    if (think_end == std::string_view::npos) return fail(FormatFailure::MissingThink);

    pos = skip_ws(text, think_end + kThinkClose.size());
    if (text.compare(pos, kAnswerOpen.size(), kAnswerOpen) != 0) {
        if (text.find(kAnswerOpen, pos) == std::string_view::npos)
            return fail(FormatFailure::MissingAnswer);
        return fail(FormatFailure::ExtraContent);
    }
    std::size_t answer_start = pos + kAnswerOpen.size();
    std::size_t answer_end = text.find(kAnswerClose, answer_start);
    if (answer_end == std::string_view::npos) return fail(FormatFailure::MissingAnswer);

    if (skip_ws(text, answer_end + kAnswerClose.size()) != text.size())
        return fail(FormatFailure::ExtraContent);

    std::string payload(text.substr(answer_start, answer_end - answer_start));
    nlohmann::json j = nlohmann::json::parse(payload, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.size() != 2 ||
        !j.contains("keyframe_timestamp") || !j.contains("bbox_2d_list") ||
        !j["bbox_2d_list"].is_array())
        return fail(FormatFailure::BadPayload);

    const auto& ts = j["keyframe_timestamp"];
    double timestamp = 0;
    if (ts.is_number()) {
        timestamp = ts.get<double>();
    } else if (ts.is_string()) {
        auto parsed = parse_timestamp_string(ts.get_ref<const std::string&>());
        if (!parsed) return fail(FormatFailure::BadTimestamp);
        timestamp = *parsed;
    } else {
        return fail(FormatFailure::BadTimestamp);
    }
    if (!(timestamp >= 0) || !std::isfinite(timestamp)) return fail(FormatFailure::BadTimestamp);

    std::vector<BoundingBox> boxes;
    for (const auto& e : j["bbox_2d_list"]) {
        if (!e.is_array() || e.size() != 4) return fail(FormatFailure::BadBox);
        double v[4];
        for (int i = 0; i < 4; ++i) {
            if (!e[i].is_number()) return fail(FormatFailure::BadBox);
            v[i] = e[i].get<double>();
        }
        BoundingBox b{v[0], v[1], v[2], v[3]};
        if (!b.valid()) return fail(FormatFailure::BadBox);
        boxes.push_back(b);
    }

    StructuredResponse r;
    r.think_text = std::string(text.substr(think_start, think_end - think_start));
    r.keyframe_timestamp = timestamp;
    r.boxes = std::move(boxes);
    r.raw_text = std::string(text);
    return {std::move(r), FormatVerdict::ok()};
}

std::string serialize_response(const StructuredResponse& r) {
    if (r.think_text.find(kThinkClose) != std::string::npos ||
        r.think_text.find(kAnswerClose) != std::string::npos)
        throw ValidationError("serialize_response: think_text contains a closing tag literal");
    if (!(r.keyframe_timestamp >= 0) || !std::isfinite(r.keyframe_timestamp))
        throw ValidationError("serialize_response: keyframe_timestamp must be finite and >= 0");
    for (const auto& b : r.boxes)
        if (!b.valid()) throw ValidationError("serialize_response: invalid box");

    nlohmann::ordered_json payload;
    payload["keyframe_timestamp"] = r.keyframe_timestamp;
    auto list = nlohmann::ordered_json::array();
    for (const auto& b : r.boxes) list.push_back({b.x1, b.y1, b.x2, b.y2});
    payload["bbox_2d_list"] = std::move(list);

    std::string out;
    out += kThinkOpen;
    out += r.think_text;
    out += kThinkClose;
    out += kAnswerOpen;
    out += payload.dump();
    out += kAnswerClose;
    return out;
}

int snap_timestamp(double t, std::span<const double> sampled_times) {
    if (sampled_times.empty()) throw ValidationError("snap_timestamp: sampled_times is empty");
    int best = 0;
    double best_dist = std::abs(sampled_times[0] - t);
    for (std::size_t i = 1; i < sampled_times.size(); ++i) {
        double d = std::abs(sampled_times[i] - t);
        if (d < best_dist) {
            best = static_cast<int>(i);
            best_dist = d;
        }
    }
    return best;
}

}  // namespace veason
