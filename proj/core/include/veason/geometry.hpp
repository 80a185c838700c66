#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace veason {

// Axis-aligned box in image coordinates (origin top-left), continuous.
// Invariant: x1 <= x2, y1 <= y2, all coordinates finite.
struct BoundingBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    double area() const { return (x2 - x1) * (y2 - y1); }
    bool valid() const;
    bool operator==(const BoundingBox&) const = default;
};

// Row-major boolean raster. bits[y * width + x] is 1 for foreground.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    bool same_shape(const BinaryMask& o) const { return width == o.width && height == o.height; }
    bool operator==(const BinaryMask&) const = default;
};

// One mask per sampled frame; all frames share dimensions.
using MaskSequence = std::vector<BinaryMask>;

// Run-length encoding of a BinaryMask: row-major scan, runs alternate
// background/foreground starting with background. A leading 0 marks a raster
// that starts with foreground; no other zero-length run is permitted.
struct RleMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint64_t> counts;

    bool operator==(const RleMask&) const = default;
};

int mask_area(const BinaryMask& m);

// |a ∩ b| / |a ∪ b|; two empty masks score 1.0. Throws on dimension mismatch.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Continuous-area IoU; 0.0 when the union has zero area.
double box_iou(const BoundingBox& a, const BoundingBox& b);

// Rasterize with half-open semantics: pixel (x, y) is foreground iff
// x1 <= x < x2 and y1 <= y < y2 after clamping the box to the image.
BinaryMask box_to_mask(const BoundingBox& b, int width, int height);

// Smallest box whose rasterization covers every foreground pixel,
// half-open like box_to_mask. nullopt for an empty mask.
std::optional<BoundingBox> tight_box(const BinaryMask& m);

// Foreground pixels 4-adjacent to background or to the image edge.
BinaryMask mask_boundary(const BinaryMask& m);

// Boundary F-measure: precision/recall of boundary pixels matched within
// Chebyshev distance tol, F = 2PR/(P+R). Both boundaries empty -> 1.0,
// exactly one empty -> 0.0.
double boundary_fscore(const BinaryMask& pred, const BinaryMask& gt, int tol);

// round(0.008 * image diagonal), the customary boundary tolerance.
int default_boundary_tolerance(int width, int height);

RleMask rle_encode(const BinaryMask& m);
BinaryMask rle_decode(const RleMask& r);

// Canonical JSON form {"w":int,"h":int,"counts":[int,...]} with no whitespace.
std::string rle_to_json(const RleMask& r);
RleMask rle_from_json(const std::string& text);

}  // namespace veason
