#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "devrec/error.hpp"

namespace devrec {

/// Pixel coordinate: x is the column, y the row (rows grow downward).
struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// Row-major 8-bit grayscale raster, 0 = black, 255 = white.
class GrayImage {
public:
    GrayImage(int width, int height, std::uint8_t fill = 255) : width_(width), height_(height) {
        if (width < 1 || height < 1)
            throw Error(Errc::InvalidSizes, "gray image must be at least 1x1");
        pixels_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (width < 1 || height < 1)
            throw Error(Errc::InvalidSizes, "gray image must be at least 1x1");
        if (pixels_.size() != static_cast<std::size_t>(width) * height)
            throw Error(Errc::DimensionMismatch, "pixel count does not match width*height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

    std::uint8_t operator()(int x, int y) const { return pixels_[index(x, y)]; }
    std::uint8_t& operator()(int x, int y) { return pixels_[index(x, y)]; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

/// Row-major binary raster; true marks foreground ink.
class BinaryImage {
public:
    BinaryImage(int width, int height, bool fill = false) : width_(width), height_(height) {
        if (width < 1 || height < 1)
            throw Error(Errc::InvalidSizes, "binary image must be at least 1x1");
        mask_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    bool operator()(int x, int y) const { return mask_[index(x, y)] != 0; }
    bool operator()(Point p) const { return (*this)(p.x, p.y); }

    /// Foreground test that treats everything outside the raster as background.
    bool on(int x, int y) const noexcept { return contains(x, y) && mask_[index(x, y)] != 0; }

    void set(int x, int y, bool v) { mask_[index(x, y)] = v ? 1 : 0; }
    void set(Point p, bool v) { set(p.x, p.y, v); }

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
    }

    bool empty() const noexcept { return count() == 0; }

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> mask_;
};

struct Rect {
    int left = 0;
    int top = 0;
    int width = 1;
    int height = 1;
    friend bool operator==(const Rect&, const Rect&) = default;
};

inline constexpr int kCanvasSize = 100;

/// A binary raster fixed at the canonical 100x100 size.
class Canvas {
public:
    Canvas() : img_(kCanvasSize, kCanvasSize) {}

    explicit Canvas(BinaryImage img) : img_(std::move(img)) {
        if (img_.width() != kCanvasSize || img_.height() != kCanvasSize)
            throw Error(Errc::InvalidSizes, "canvas must be exactly 100x100");
    }

    const BinaryImage& image() const noexcept { return img_; }
    bool operator()(int x, int y) const { return img_(x, y); }
    bool on(int x, int y) const noexcept { return img_.on(x, y); }
    void set(int x, int y, bool v) { img_.set(x, y, v); }

    friend bool operator==(const Canvas&, const Canvas&) = default;

private:
    BinaryImage img_;
};

// ---------------------------------------------------------------------------
// Binarization

struct BinarizeResult {
    BinaryImage image;
    double threshold = 128.0;
    int iterations = 0;
    /// The last split left one class empty and the threshold was frozen.
    bool degenerate = false;
};

inline constexpr int kMaxThresholdIterations = 64;

/// Iterative mean-of-means threshold selection starting at 128.
///
/// Pixels strictly below the threshold are ink, pixels at or above it are
/// background. The threshold is replaced by the mean of the two class means
/// until the relative change drops below 2%. If a split leaves one class
/// empty, the threshold is frozen at its current value. Throws AllBackground
/// when the final partition has no ink at all.
inline BinarizeResult binarize_detailed(const GrayImage& img) {
    const auto px = img.pixels();
    double t = 128.0;
    int iterations = 0;
    bool degenerate = false;

    for (; iterations < kMaxThresholdIterations; ++iterations) {
        double fg_sum = 0, bg_sum = 0;
        std::size_t fg_n = 0, bg_n = 0;
        for (auto v : px) {
            if (v < t) {
                fg_sum += v;
                ++fg_n;
            } else {
                bg_sum += v;
                ++bg_n;
            }
        }
        if (fg_n == 0 || bg_n == 0) {
            degenerate = true;
            break;
        }
        const double next = 0.5 * (fg_sum / fg_n + bg_sum / bg_n);
        const double rel = std::abs(next - t) / t;
        t = next;
        if (rel < 0.02) {
            ++iterations;
            break;
        }
    }

    BinaryImage out(img.width(), img.height());
    std::size_t ink = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (img(x, y) < t) {
                out.set(x, y, true);
                ++ink;
            }
    if (ink == 0)
        throw Error(Errc::AllBackground, "no pixel falls below the converged threshold");
    return {std::move(out), t, iterations, degenerate};
}

inline BinaryImage binarize(const GrayImage& img) { return binarize_detailed(img).image; }

// ---------------------------------------------------------------------------
// Cropping and scaling

inline Rect tight_bbox(const BinaryImage& img) {
    int x0 = img.width(), y0 = img.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (img(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0)
        throw Error(Errc::NoForeground, "cannot bound an empty mask");
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

namespace detail {

// Nearest-neighbour source index for destination index i on a 100-wide axis.
// The first and last destination samples land exactly on the first and last
// source samples, so a tight crop stays tight after scaling.
inline int nearest_source(int i, int extent) {
    if (extent == 1)
        return 0;
    const double pos = static_cast<double>(i) * (extent - 1) / (kCanvasSize - 1);
    return static_cast<int>(std::lround(pos));
}

} // namespace detail

/// Stretches the region `box` of `img` onto the 100x100 canvas, each axis
/// independently, by nearest-neighbour sampling.
inline Canvas scale_to_canvas(const BinaryImage& img, const Rect& box) {
    if (box.width < 1 || box.height < 1 || box.left < 0 || box.top < 0 ||
        box.left + box.width > img.width() || box.top + box.height > img.height())
        throw Error(Errc::InvalidArgument, "box does not lie inside the image");

    std::vector<int> sx(kCanvasSize), sy(kCanvasSize);
    for (int i = 0; i < kCanvasSize; ++i) {
        sx[i] = box.left + detail::nearest_source(i, box.width);
        sy[i] = box.top + detail::nearest_source(i, box.height);
    }
    Canvas out;
    for (int y = 0; y < kCanvasSize; ++y)
        for (int x = 0; x < kCanvasSize; ++x)
            out.set(x, y, img(sx[x], sy[y]));
    return out;
}

// ---------------------------------------------------------------------------
// Morphology (3x3 square structuring element)

/// Pixels outside the raster count as background.
inline BinaryImage dilate3x3(const BinaryImage& img) {
    BinaryImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            bool hit = false;
            for (int dy = -1; dy <= 1 && !hit; ++dy)
                for (int dx = -1; dx <= 1 && !hit; ++dx)
                    hit = img.on(x + dx, y + dy);
            out.set(x, y, hit);
        }
    return out;
}

/// Pixels outside the raster count as foreground, which makes erosion the
/// adjoint of dilate3x3 on the bounded domain.
inline BinaryImage erode3x3(const BinaryImage& img) {
    BinaryImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            bool keep = true;
            for (int dy = -1; dy <= 1 && keep; ++dy)
                for (int dx = -1; dx <= 1 && keep; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (img.contains(nx, ny))
                        keep = img(nx, ny);
                }
            out.set(x, y, keep);
        }
    return out;
}

inline BinaryImage close3x3(const BinaryImage& img) { return erode3x3(dilate3x3(img)); }

/// One dilation followed by one closing.
inline Canvas smooth(const Canvas& img) {
    return Canvas(close3x3(dilate3x3(img.image())));
}

/// Full preprocessing chain for one grayscale glyph.
inline Canvas preprocess(const GrayImage& img) {
    const BinaryImage bin = binarize(img);
    return smooth(scale_to_canvas(bin, tight_bbox(bin)));
}

} // namespace devrec
