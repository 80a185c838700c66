#include "veason/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "veason/errors.hpp"

namespace veason {

bool BoundingBox::valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           x1 <= x2 && y1 <= y2;
}

int mask_area(const BinaryMask& m) {
    int n = 0;
    for (std::uint8_t b : m.bits) n += b;
    return n;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) throw ValidationError("mask_iou: dimension mismatch");
    int inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        inter += a.bits[i] & b.bits[i];
        uni += a.bits[i] | b.bits[i];
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
    double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

BinaryMask box_to_mask(const BoundingBox& b, int width, int height) {
    BinaryMask m(width, height);
    int x_lo = std::max(0, static_cast<int>(std::ceil(b.x1)));
    int y_lo = std::max(0, static_cast<int>(std::ceil(b.y1)));
    int x_hi = std::min(width, static_cast<int>(std::ceil(b.x2)));
    int y_hi = std::min(height, static_cast<int>(std::ceil(b.y2)));
    for (int y = y_lo; y < y_hi; ++y)
        for (int x = x_lo; x < x_hi; ++x) m.set(x, y, true);
    return m;
}

std::optional<BoundingBox> tight_box(const BinaryMask& m) {
    int x_min = m.width, y_min = m.height, x_max = -1, y_max = -1;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            x_min = std::min(x_min, x);
            y_min = std::min(y_min, y);
            x_max = std::max(x_max, x);
            y_max = std::max(y_max, y);
        }
    }
    if (x_max < 0) return std::nullopt;
    return BoundingBox{static_cast<double>(x_min), static_cast<double>(y_min),
                       static_cast<double>(x_max + 1), static_cast<double>(y_max + 1)};
}

BinaryMask mask_boundary(const BinaryMask& m) {
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            bool edge = x == 0 || y == 0 || x == m.width - 1 || y == m.height - 1;
            bool exposed = edge || !m.at(x - 1, y) || !m.at(x + 1, y) || !m.at(x, y - 1) ||
                           !m.at(x, y + 1);
            if (exposed) out.set(x, y, true);
        }
    }
    return out;
}

namespace {

// Chebyshev (square) dilation by radius r, separable in x then y.
BinaryMask dilate_chebyshev(const BinaryMask& m, int r) {
    if (r <= 0) return m;
    BinaryMask h(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            bool v = false;
            for (int dx = -r; dx <= r && !v; ++dx) {
                int xx = x + dx;
                if (xx >= 0 && xx < m.width && m.at(xx, y)) v = true;
            }
            h.set(x, y, v);
        }
    }
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            bool v = false;
            for (int dy = -r; dy <= r && !v; ++dy) {
                int yy = y + dy;
                if (yy >= 0 && yy < m.height && h.at(x, yy)) v = true;
            }
            out.set(x, y, v);
        }
    }
    return out;
}

int overlap_count(const BinaryMask& a, const BinaryMask& b) {
    int n = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) n += a.bits[i] & b.bits[i];
    return n;
}

}  // namespace

double boundary_fscore(const BinaryMask& pred, const BinaryMask& gt, int tol) {
    if (!pred.same_shape(gt)) throw ValidationError("boundary_fscore: dimension mismatch");
    if (tol < 0) throw ValidationError("boundary_fscore: tol must be >= 0");
    BinaryMask pb = mask_boundary(pred);
    BinaryMask gb = mask_boundary(gt);
    int np = mask_area(pb), ng = mask_area(gb);
    if (np == 0 && ng == 0) return 1.0;
    if (np == 0 || ng == 0) return 0.0;
    BinaryMask gd = dilate_chebyshev(gb, tol);
    BinaryMask pd = dilate_chebyshev(pb, tol);
    double precision = static_cast<double>(overlap_count(pb, gd)) / np;
    double recall = static_cast<double>(overlap_count(gb, pd)) / ng;
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

int default_boundary_tolerance(int width, int height) {
    return static_cast<int>(std::llround(0.008 * std::hypot(width, height)));
}

RleMask rle_encode(const BinaryMask& m) {
    RleMask r;
    r.width = m.width;
    r.height = m.height;
    if (m.bits.empty()) return r;
    std::uint8_t value = 0;  // runs start with background
    std::uint64_t run = 0;
    for (std::uint8_t b : m.bits) {
        if (b == value) {
            ++run;
        } else {
            r.counts.push_back(run);
            value = b;
            run = 1;
        }
    }
    r.counts.push_back(run);
    return r;
}

namespace {

void validate_rle(const RleMask& r) {
    if (r.width < 0 || r.height < 0) throw ValidationError("rle: negative dimensions");
    std::uint64_t total = static_cast<std::uint64_t>(r.width) * static_cast<std::uint64_t>(r.height);
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < r.counts.size(); ++i) {
        if (r.counts[i] == 0 && !(i == 0 && r.counts.size() > 1))
            throw ValidationError("rle: zero-length run outside the leading position");
        sum += r.counts[i];
    }
    if (sum != total) throw ValidationError("rle: counts do not sum to width*height");
}

}  // namespace

BinaryMask rle_decode(const RleMask& r) {
    validate_rle(r);
    BinaryMask m(r.width, r.height);
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (std::uint64_t c : r.counts) {
        for (std::uint64_t k = 0; k < c; ++k) m.bits[pos++] = value;
        value ^= 1;
    }
    return m;
}

std::string rle_to_json(const RleMask& r) {
    std::string out = "{\"w\":" + std::to_string(r.width) + ",\"h\":" + std::to_string(r.height) +
                      ",\"counts\":[";
    for (std::size_t i = 0; i < r.counts.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(r.counts[i]);
    }
    out += "]}";
    return out;
}

RleMask rle_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.size() != 3 || !j.contains("w") ||
        !j.contains("h") || !j.contains("counts"))
        throw ValidationError("rle: expected object with keys w, h, counts");
    if (!j["w"].is_number_integer() || !j["h"].is_number_integer() || !j["counts"].is_array())
        throw ValidationError("rle: bad field types");
    RleMask r;
    r.width = j["w"].get<int>();
    r.height = j["h"].get<int>();
    for (const auto& c : j["counts"]) {
        if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0))
            throw ValidationError("rle: counts must be non-negative integers");
        r.counts.push_back(c.get<std::uint64_t>());
    }
    validate_rle(r);
    return r;
}

}  // namespace veason
