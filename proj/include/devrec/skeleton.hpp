#pragma once

#include <array>
#include <utility>
#include <vector>

#include "devrec/error.hpp"
#include "devrec/raster.hpp"

namespace devrec {

/// Unit-width skeleton on the canonical canvas. Only thin() creates one.
class Skeleton {
public:
    const Canvas& canvas() const noexcept { return canvas_; }
    const BinaryImage& image() const noexcept { return canvas_.image(); }

    friend bool operator==(const Skeleton&, const Skeleton&) = default;

private:
    explicit Skeleton(Canvas c) : canvas_(std::move(c)) {}
    friend Skeleton thin(const Canvas&);
    friend Skeleton as_skeleton(const Canvas&);

    Canvas canvas_;
};

enum class PointClass { Background, Isolated, OpenEnd, Regular, Junction };

namespace detail {

// Clockwise ring starting at north: N, NE, E, SE, S, SW, W, NW.
inline constexpr std::array<int, 8> kRingDx{0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr std::array<int, 8> kRingDy{-1, -1, 0, 1, 1, 1, 0, -1};

inline std::array<bool, 8> ring(const BinaryImage& img, int x, int y) {
    std::array<bool, 8> r{};
    for (int i = 0; i < 8; ++i)
        r[i] = img.on(x + kRingDx[i], y + kRingDy[i]);
    return r;
}

inline int neighbour_count(const std::array<bool, 8>& r) {
    int n = 0;
    for (bool b : r)
        n += b;
    return n;
}

// Number of background-to-foreground transitions around the ring.
inline int transitions(const std::array<bool, 8>& r) {
    int a = 0;
    for (int i = 0; i < 8; ++i)
        a += !r[i] && r[(i + 1) % 8];
    return a;
}

// Yokoi 8-connectivity number. A foreground pixel whose value is 1 can be
// removed without changing the number of 8-components or holes.
inline int connectivity8(const std::array<bool, 8>& r) {
    // reorder to E, NE, N, NW, W, SW, S, SE
    const std::array<bool, 8> q{r[2], r[1], r[0], r[7], r[6], r[5], r[4], r[3]};
    int c = 0;
    for (int k = 0; k < 8; k += 2) {
        const int a = !q[k], b = !q[(k + 1) % 8], d = !q[(k + 2) % 8];
        c += a - a * b * d;
    }
    return c;
}

inline bool in_full_2x2(const BinaryImage& img, int x, int y) {
    for (int oy = -1; oy <= 0; ++oy)
        for (int ox = -1; ox <= 0; ++ox) {
            const int x0 = x + ox, y0 = y + oy;
            if (img.on(x0, y0) && img.on(x0 + 1, y0) && img.on(x0, y0 + 1) &&
                img.on(x0 + 1, y0 + 1))
                return true;
        }
    return false;
}

// One Zhang-Suen subiteration. Candidates are selected on a snapshot, then
// deleted in row-major order with the topology conditions re-checked against
// the current raster so that two-pixel-thick structures cannot vanish.
inline bool zhang_suen_pass(BinaryImage& img, int sub) {
    std::vector<Point> marked;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            if (!img(x, y))
                continue;
            const auto r = ring(img, x, y);
            const int b = neighbour_count(r);
            if (b < 2 || b > 6 || transitions(r) != 1)
                continue;
            const bool n = r[0], e = r[2], s = r[4], w = r[6];
            const bool ok = sub == 0 ? !(n && e && s) && !(e && s && w)
                                     : !(n && e && w) && !(n && s && w);
            if (ok)
                marked.push_back({x, y});
        }

    bool changed = false;
    for (const Point p : marked) {
        const auto r = ring(img, p.x, p.y);
        const int b = neighbour_count(r);
        if (b >= 2 && b <= 6 && transitions(r) == 1) {
            img.set(p, false);
            changed = true;
        }
    }
    return changed;
}

} // namespace detail

/// Removes redundant pixels from 2x2 foreground blocks.
///
/// Repeated row-major scans delete any pixel that sits in a 2x2 all-ink
/// block, is not an open end, and is simple (8-connectivity number 1), until
/// a scan deletes nothing.
inline BinaryImage prune_to_unit_width(BinaryImage img) {
    for (bool changed = true; changed;) {
        changed = false;
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) {
                if (!img(x, y) || !detail::in_full_2x2(img, x, y))
                    continue;
                const auto r = detail::ring(img, x, y);
                if (detail::neighbour_count(r) == 1 || detail::connectivity8(r) != 1)
                    continue;
                img.set(x, y, false);
                changed = true;
            }
    }
    return img;
}

/// Zhang-Suen thinning followed by unit-width pruning, alternated until
/// neither step changes the raster.
inline BinaryImage thin_image(BinaryImage img) {
    for (;;) {
        bool changed = false;
        for (bool pass = true; pass;) {
            const bool a = detail::zhang_suen_pass(img, 0);
            const bool b = detail::zhang_suen_pass(img, 1);
            pass = a || b;
            changed |= pass;
        }
        BinaryImage pruned = prune_to_unit_width(img);
        if (!(pruned == img)) {
            img = std::move(pruned);
            changed = true;
        }
        if (!changed)
            return img;
    }
}

inline Skeleton thin(const Canvas& img) { return Skeleton(Canvas(thin_image(img.image()))); }

/// Wraps a raster that is already unit width (test fixtures, reloaded data).
/// Throws InvalidArgument if it still contains a 2x2 ink block.
inline Skeleton as_skeleton(const Canvas& img) {
    for (int y = 0; y + 1 < kCanvasSize; ++y)
        for (int x = 0; x + 1 < kCanvasSize; ++x)
            if (img(x, y) && img(x + 1, y) && img(x, y + 1) && img(x + 1, y + 1))
                throw Error(Errc::InvalidArgument, "raster is not unit width");
    return Skeleton(img);
}

inline PointClass classify_point(const BinaryImage& img, Point p) {
    if (!img.contains(p.x, p.y))
        throw Error(Errc::OutOfBounds, "point outside raster");
    if (!img(p))
        return PointClass::Background;
    switch (detail::neighbour_count(detail::ring(img, p.x, p.y))) {
    case 0: return PointClass::Isolated;
    case 1: return PointClass::OpenEnd;
    case 2: return PointClass::Regular;
    default: return PointClass::Junction;
    }
}

inline PointClass classify_point(const Skeleton& skel, Point p) {
    return classify_point(skel.image(), p);
}

} // namespace devrec
