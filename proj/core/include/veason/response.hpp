#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "veason/geometry.hpp"

namespace veason {

enum class FormatFailure {
    MissingThink,
    MissingAnswer,
    BadOrder,
    BadPayload,
    BadBox,
    BadTimestamp,
    ExtraContent,
};

std::string_view to_string(FormatFailure f);

struct FormatVerdict {
    bool well_formed = false;
    std::optional<FormatFailure> failure;

    static FormatVerdict ok() { return {true, std::nullopt}; }
    static FormatVerdict fail(FormatFailure f) { return {false, f}; }
};

// A parsed <think>...</think><answer>...</answer> response. The answer payload
// carries keyframe_timestamp (seconds) and bbox_2d_list.
struct StructuredResponse {
    std::string think_text;
    double keyframe_timestamp = 0;
    std::vector<BoundingBox> boxes;
    std::string raw_text;
};

struct ParseResult {
    std::optional<StructuredResponse> response;
    FormatVerdict verdict;

    bool ok() const { return verdict.well_formed; }
};

// Total over arbitrary input: either a response or exactly one failure reason,
// the first failure in document order.
ParseResult parse_response(std::string_view text);

// Inverse of parse_response on valid responses. Throws ValidationError when
// think_text contains a literal closing tag, or a field violates invariants.
std::string serialize_response(const StructuredResponse& r);

// Index of the sampled time nearest to t; ties resolve to the earlier frame.
// sampled_times must be nonempty and strictly increasing.
int snap_timestamp(double t, std::span<const double> sampled_times);

}  // namespace veason
