#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "devrec/error.hpp"
#include "devrec/raster.hpp"
#include "devrec/skeleton.hpp"

namespace devrec {

enum class FeatureKind { Shadow16, ChainCode200, Intersection32 };

constexpr std::size_t feature_length(FeatureKind k) noexcept {
    switch (k) {
    case FeatureKind::Shadow16: return 16;
    case FeatureKind::ChainCode200: return 200;
    case FeatureKind::Intersection32: return 32;
    }
    return 0;
}

constexpr std::string_view feature_tag(FeatureKind k) noexcept {
    switch (k) {
    case FeatureKind::Shadow16: return "shadow";
    case FeatureKind::ChainCode200: return "chaincode";
    case FeatureKind::Intersection32: return "intersection";
    }
    return "";
}

inline std::optional<FeatureKind> feature_kind_from_tag(std::string_view tag) noexcept {
    for (auto k : {FeatureKind::Shadow16, FeatureKind::ChainCode200, FeatureKind::Intersection32})
        if (feature_tag(k) == tag)
            return k;
    return std::nullopt;
}

inline std::optional<FeatureKind> feature_kind_from_length(std::size_t n) noexcept {
    for (auto k : {FeatureKind::Shadow16, FeatureKind::ChainCode200, FeatureKind::Intersection32})
        if (feature_length(k) == n)
            return k;
    return std::nullopt;
}

/// A feature vector whose length always matches its kind.
class FeatureVector {
public:
    FeatureVector(FeatureKind kind, std::vector<double> values)
        : kind_(kind), values_(std::move(values)) {
        if (values_.size() != feature_length(kind_))
            throw Error(Errc::DimensionMismatch, "feature vector length does not match its kind");
    }

    FeatureKind kind() const noexcept { return kind_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    FeatureKind kind_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Shadow features

/// Octant of a canvas pixel. The canvas is cut by its two diagonals and its
/// two centre lines; octants are numbered clockwise starting with the upper
/// triangle of the top-left quadrant. Pixels whose centre lies on a diagonal
/// go to the lower-numbered of the two octants.
inline int shadow_octant(int x, int y) noexcept {
    // doubled offsets from the canvas centre, always odd so never zero
    const int dx = 2 * x - (kCanvasSize - 1);
    const int dy = 2 * y - (kCanvasSize - 1);
    const int ax = std::abs(dx), ay = std::abs(dy);
    if (dy < 0)
        return dx < 0 ? (ay >= ax ? 0 : 7) : (ay >= ax ? 1 : 2);
    return dx > 0 ? (ax >= ay ? 3 : 4) : (ay >= ax ? 5 : 6);
}

/// For a pixel whose centre lies on a diagonal, the other octant sharing
/// that diagonal; -1 otherwise.
inline int shadow_diagonal_partner(int x, int y) noexcept {
    const int dx = 2 * x - (kCanvasSize - 1);
    const int dy = 2 * y - (kCanvasSize - 1);
    if (std::abs(dx) != std::abs(dy))
        return -1;
    constexpr std::array<int, 8> partner{7, 2, 1, 4, 3, 6, 5, 0};
    return partner[static_cast<std::size_t>(shadow_octant(x, y))];
}

/// 16 shadow lengths: for each octant, the covered fraction of its half box
/// side, then of its half centre line. A diagonal pixel is split by the
/// diagonal, so it casts a shadow in both octants.
inline FeatureVector shadow_features(const Canvas& img) {
    constexpr int half = kCanvasSize / 2;
    std::array<std::array<std::array<bool, half>, 2>, 8> covered{};
    auto cast = [&](int o, int x, int y) {
        // octants 0,1,4,5 touch the top or bottom side, the rest touch left or right
        const bool horizontal_side = o == 0 || o == 1 || o == 4 || o == 5;
        covered[o][0][(horizontal_side ? x : y) % half] = true;
        covered[o][1][(horizontal_side ? y : x) % half] = true;
    };
    for (int y = 0; y < kCanvasSize; ++y)
        for (int x = 0; x < kCanvasSize; ++x) {
            if (!img(x, y))
                continue;
            cast(shadow_octant(x, y), x, y);
            if (const int p = shadow_diagonal_partner(x, y); p >= 0)
                cast(p, x, y);
        }

    std::vector<double> v;
    v.reserve(16);
    for (const auto& oct : covered)
        for (const auto& seg : oct)
            v.push_back(static_cast<double>(std::count(seg.begin(), seg.end(), true)) / half);
    return FeatureVector(FeatureKind::Shadow16, std::move(v));
}

// ---------------------------------------------------------------------------
// Contour and chain code

class ContourImage {
public:
    const Canvas& canvas() const noexcept { return canvas_; }
    bool operator()(int x, int y) const { return canvas_(x, y); }
    bool on(int x, int y) const noexcept { return canvas_.on(x, y); }

    friend bool operator==(const ContourImage&, const ContourImage&) = default;

private:
    explicit ContourImage(Canvas c) : canvas_(std::move(c)) {}
    friend ContourImage extract_contour(const Canvas&);

    Canvas canvas_;
};

/// Ink pixels with at least one background 4-neighbour; the area outside the
/// canvas is background.
inline ContourImage extract_contour(const Canvas& img) {
    Canvas out;
    for (int y = 0; y < kCanvasSize; ++y)
        for (int x = 0; x < kCanvasSize; ++x)
            if (img(x, y) && (!img.on(x + 1, y) || !img.on(x - 1, y) || !img.on(x, y + 1) ||
                              !img.on(x, y - 1)))
                out.set(x, y, true);
    return ContourImage(std::move(out));
}

/// Freeman direction codes, counter-clockwise from east; y grows downward.
inline constexpr std::array<int, 8> kChainDx{1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr std::array<int, 8> kChainDy{0, -1, -1, -1, 0, 1, 1, 1};

struct ChainStep {
    Point from;
    std::uint8_t code = 0;
    friend bool operator==(const ChainStep&, const ChainStep&) = default;
};

struct ChainTrace {
    Point start;
    std::vector<ChainStep> steps;
    friend bool operator==(const ChainTrace&, const ChainTrace&) = default;
};

namespace detail {

inline int direction_between(Point from, Point to) {
    for (int d = 0; d < 8; ++d)
        if (from.x + kChainDx[d] == to.x && from.y + kChainDy[d] == to.y)
            return d;
    return -1;
}

// Clockwise Moore-neighbour walk from `start` with Jacob's stopping rule:
// the walk ends when it is back at the start and about to repeat its first
// move. Marks every pixel it passes in `visited`.
inline ChainTrace moore_walk(const ContourImage& c, Point start, std::vector<std::uint8_t>& visited) {
    ChainTrace trace{start, {}};
    visited[start.y * kCanvasSize + start.x] = 1;

    Point cur = start;
    Point back{start.x - 1, start.y};
    int first_move = -1;
    const std::size_t limit = 8u * kCanvasSize * kCanvasSize;

    while (trace.steps.size() < limit) {
        const int db = direction_between(cur, back);
        int found = -1;
        // clockwise means decreasing code; start just after the backtrack pixel
        for (int i = 1; i <= 8; ++i) {
            const int d = (db - i + 16) % 8;
            if (c.on(cur.x + kChainDx[d], cur.y + kChainDy[d])) {
                found = d;
                break;
            }
        }
        if (found < 0)
            break;
        if (cur == start && found == first_move)
            break;
        if (first_move < 0)
            first_move = found;

        const int prev = (found + 1) % 8;
        back = {cur.x + kChainDx[prev], cur.y + kChainDy[prev]};
        trace.steps.push_back({cur, static_cast<std::uint8_t>(found)});
        cur = {cur.x + kChainDx[found], cur.y + kChainDy[found]};
        visited[cur.y * kCanvasSize + cur.x] = 1;
    }
    return trace;
}

} // namespace detail

/// Traces every 8-connected component of the contour image clockwise from
/// its topmost-then-leftmost pixel. Contour pixels the walk never reaches
/// become single-pixel traces without codes. Traces are ordered by start
/// pixel, row-major.
inline std::vector<ChainTrace> chain_trace(const ContourImage& contour) {
    constexpr int n = kCanvasSize;
    std::vector<int> component(n * n, -1);
    std::vector<std::uint8_t> visited(n * n, 0);
    std::vector<ChainTrace> traces;
    std::vector<Point> stack;

    int label = 0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (!contour(x, y) || component[y * n + x] >= 0)
                continue;
            std::vector<Point> members;
            stack.push_back({x, y});
            component[y * n + x] = label;
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                members.push_back(p);
                for (int d = 0; d < 8; ++d) {
                    const int qx = p.x + kChainDx[d], qy = p.y + kChainDy[d];
                    if (contour.on(qx, qy) && component[qy * n + qx] < 0) {
                        component[qy * n + qx] = label;
                        stack.push_back({qx, qy});
                    }
                }
            }
            ++label;

            traces.push_back(detail::moore_walk(contour, {x, y}, visited));
            for (const Point p : members)
                if (!visited[p.y * n + p.x]) {
                    visited[p.y * n + p.x] = 1;
                    traces.push_back({p, {}});
                }
        }

    std::sort(traces.begin(), traces.end(), [](const ChainTrace& a, const ChainTrace& b) {
        return std::pair(a.start.y, a.start.x) < std::pair(b.start.y, b.start.x);
    });
    return traces;
}

inline constexpr int kChainBlocks = 5;
inline constexpr int kChainBlockSize = kCanvasSize / kChainBlocks;

/// Raw 25x8 direction counts, blocks row-major, directions ascending.
inline std::array<std::size_t, 200> chaincode_counts(const std::vector<ChainTrace>& traces) {
    std::array<std::size_t, 200> counts{};
    for (const auto& t : traces)
        for (const auto& s : t.steps) {
            if (s.from.x < 0 || s.from.y < 0 || s.from.x >= kCanvasSize || s.from.y >= kCanvasSize ||
                s.code > 7)
                throw Error(Errc::InvalidArgument, "chain step outside the canvas");
            const int block = (s.from.y / kChainBlockSize) * kChainBlocks + s.from.x / kChainBlockSize;
            ++counts[block * 8 + s.code];
        }
    return counts;
}

/// Relative frequency of each direction code per 20x20 block.
inline FeatureVector chaincode_histogram_features(const std::vector<ChainTrace>& traces) {
    const auto counts = chaincode_counts(traces);
    std::size_t total = 0;
    for (auto c : counts)
        total += c;
    std::vector<double> v(counts.size(), 0.0);
    if (total > 0)
        for (std::size_t i = 0; i < counts.size(); ++i)
            v[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return FeatureVector(FeatureKind::ChainCode200, std::move(v));
}

// ---------------------------------------------------------------------------
// Intersection features

inline constexpr int kSegmentsPerSide = 4;
inline constexpr int kSegmentSize = kCanvasSize / kSegmentsPerSide;

/// Open-end counts for the 16 segments (row-major) followed by junction counts.
inline FeatureVector intersection_features(const Skeleton& skel) {
    std::vector<double> v(32, 0.0);
    const auto& img = skel.image();
    for (int y = 0; y < kCanvasSize; ++y)
        for (int x = 0; x < kCanvasSize; ++x) {
            const int seg = (y / kSegmentSize) * kSegmentsPerSide + x / kSegmentSize;
            switch (classify_point(img, {x, y})) {
            case PointClass::OpenEnd: v[seg] += 1; break;
            case PointClass::Junction: v[16 + seg] += 1; break;
            default: break;
            }
        }
    return FeatureVector(FeatureKind::Intersection32, std::move(v));
}

// ---------------------------------------------------------------------------
// Whole-glyph extraction

struct FeatureSet {
    FeatureVector shadow;
    FeatureVector chaincode;
    FeatureVector intersection;

    const FeatureVector& get(FeatureKind k) const noexcept {
        switch (k) {
        case FeatureKind::Shadow16: return shadow;
        case FeatureKind::ChainCode200: return chaincode;
        case FeatureKind::Intersection32: break;
        }
        return intersection;
    }

    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

inline FeatureSet extract_features(const Canvas& canvas) {
    return {shadow_features(canvas), chaincode_histogram_features(chain_trace(extract_contour(canvas))),
            intersection_features(thin(canvas))};
}

// ---------------------------------------------------------------------------
// Feature-dump lines: label,kind,v0,v1,...

inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string format_feature_line(int label, const FeatureVector& f) {
    std::string line = std::to_string(label);
    line += ',';
    line += feature_tag(f.kind());
    for (double v : f.values()) {
        line += ',';
        line += format_double(v);
    }
    return line;
}

struct FeatureRecord {
    int label = 0;
    FeatureVector features;
};

inline FeatureRecord parse_feature_line(std::string_view line) {
    std::vector<std::string_view> fields;
    while (true) {
        const auto comma = line.find(',');
        fields.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos)
            break;
        line.remove_prefix(comma + 1);
    }
    if (fields.size() < 3)
        throw Error(Errc::FormatError, "feature line needs label, kind and values");

    int label = -1;
    const auto lr = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), label);
    if (lr.ec != std::errc{} || lr.ptr != fields[0].data() + fields[0].size() || label < 0)
        throw Error(Errc::FormatError, "bad label field");

    const auto kind = feature_kind_from_tag(fields[1]);
    if (!kind)
        throw Error(Errc::FormatError, "unknown feature kind '" + std::string(fields[1]) + "'");

    std::vector<double> values;
    values.reserve(fields.size() - 2);
    for (std::size_t i = 2; i < fields.size(); ++i) {
        double v = 0;
        const auto f = fields[i];
        const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
        if (r.ec != std::errc{} || r.ptr != f.data() + f.size())
            throw Error(Errc::FormatError, "bad feature value '" + std::string(f) + "'");
        values.push_back(v);
    }
    if (values.size() != feature_length(*kind))
        throw Error(Errc::FormatError, "wrong number of values for " + std::string(fields[1]));
    return {label, FeatureVector(*kind, std::move(values))};
}

} // namespace devrec
