#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "devrec/error.hpp"
#include "devrec/pgm.hpp"
#include "devrec/raster.hpp"

// Rendered stroke glyphs for exercising the pipeline without a real corpus.

namespace devrec::synthetic {

struct Vec2 {
    double x = 0;
    double y = 0;
};

using Polyline = std::vector<Vec2>;

namespace detail {

inline Polyline arc(Vec2 c, double r, double from_deg, double to_deg, int steps = 24) {
    Polyline p;
    for (int i = 0; i <= steps; ++i) {
        const double a = (from_deg + (to_deg - from_deg) * i / steps) * std::numbers::pi / 180.0;
        p.push_back({c.x + r * std::cos(a), c.y - r * std::sin(a)});
    }
    return p;
}

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace detail

inline constexpr int kTemplateCount = 10;

/// Stroke templates in the unit square (y down).
inline std::vector<Polyline> glyph_template(int cls) {
    using detail::arc;
    switch (cls) {
    case 0: // T
        return {{{0.1, 0.1}, {0.9, 0.1}}, {{0.5, 0.1}, {0.5, 0.9}}};
    case 1: // O
        return {arc({0.5, 0.5}, 0.4, 0, 360, 48)};
    case 2: // X
        return {{{0.1, 0.1}, {0.9, 0.9}}, {{0.9, 0.1}, {0.1, 0.9}}};
    case 3: // L
        return {{{0.15, 0.1}, {0.15, 0.9}, {0.85, 0.9}}};
    case 4: // triangle
        return {{{0.5, 0.1}, {0.9, 0.9}, {0.1, 0.9}, {0.5, 0.1}}};
    case 5: // S
        return {arc({0.5, 0.3}, 0.2, 0, 270, 24), arc({0.5, 0.7}, 0.2, 90, -180, 24)};
    case 6: // +
        return {{{0.5, 0.1}, {0.5, 0.9}}, {{0.1, 0.5}, {0.9, 0.5}}};
    case 7: // Z
        return {{{0.1, 0.1}, {0.9, 0.1}, {0.1, 0.9}, {0.9, 0.9}}};
    case 8: // U
        return {{{0.15, 0.1}, {0.15, 0.6}}, arc({0.5, 0.6}, 0.35, 180, 360, 24), {{0.85, 0.6}, {0.85, 0.1}}};
    case 9: // header bar over a loop, loosely like a Devnagari letter
        return {{{0.05, 0.1}, {0.95, 0.1}}, {{0.7, 0.1}, {0.7, 0.9}}, arc({0.4, 0.6}, 0.25, 0, 360, 36)};
    default:
        throw Error(Errc::InvalidArgument, "no glyph template " + std::to_string(cls));
    }
}

struct RenderOptions {
    int size = 64;
    double max_shift = 0.08;       // fraction of the image
    double min_scale = 0.7;
    double max_scale = 0.95;
    double max_rotation_deg = 8.0;
    double min_thickness = 2.5;    // pixels
    double max_thickness = 6.0;
    double noise_sigma = 8.0;      // gray levels
};

/// Renders one randomized instance of template `cls`: dark ink on a light,
/// slightly noisy background.
inline GrayImage render_glyph(int cls, std::mt19937_64& rng, const RenderOptions& opt = {}) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto between = [&](double a, double b) { return a + (b - a) * u(rng); };

    const double sx = between(opt.min_scale, opt.max_scale);
    const double sy = between(opt.min_scale, opt.max_scale);
    const double rot = between(-opt.max_rotation_deg, opt.max_rotation_deg) * std::numbers::pi / 180.0;
    const double tx = between(-opt.max_shift, opt.max_shift);
    const double ty = between(-opt.max_shift, opt.max_shift);
    const double thickness = between(opt.min_thickness, opt.max_thickness);
    const double ink = between(20, 70);
    const double blank = between(190, 235);

    const double n = opt.size;
    const double cr = std::cos(rot), sr = std::sin(rot);
    std::vector<Polyline> strokes = glyph_template(cls);
    for (auto& line : strokes)
        for (auto& p : line) {
            const double ux = (p.x - 0.5) * sx, uy = (p.y - 0.5) * sy;
            p = {(0.5 + tx + cr * ux - sr * uy) * n, (0.5 + ty + sr * ux + cr * uy) * n};
        }

    std::normal_distribution<double> noise(0.0, opt.noise_sigma);
    GrayImage img(opt.size, opt.size);
    for (int y = 0; y < opt.size; ++y)
        for (int x = 0; x < opt.size; ++x) {
            const Vec2 c{x + 0.5, y + 0.5};
            double d = 1e9;
            for (const auto& line : strokes)
                for (std::size_t i = 0; i + 1 < line.size(); ++i)
                    d = std::min(d, detail::segment_distance(c, line[i], line[i + 1]));
            const double base = d <= thickness / 2 ? ink : blank;
            img(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(base + noise(rng)), 0L, 255L));
        }
    return img;
}

struct CorpusOptions {
    int classes = 10;
    int per_class = 60;
    std::uint64_t seed = 7;
    RenderOptions render;
};

/// Writes <dir>/c00/s000.pgm ... one directory per class.
inline void write_corpus(const std::filesystem::path& dir, const CorpusOptions& opt) {
    if (opt.classes < 1 || opt.classes > kTemplateCount || opt.per_class < 1)
        throw Error(Errc::InvalidArgument, "classes must be in [1, 10] and per_class >= 1");
    std::mt19937_64 rng(opt.seed);
    for (int c = 0; c < opt.classes; ++c) {
        char cname[16];
        std::snprintf(cname, sizeof cname, "c%02d", c);
        const auto cdir = dir / cname;
        std::filesystem::create_directories(cdir);
        for (int i = 0; i < opt.per_class; ++i) {
            char fname[32];
            std::snprintf(fname, sizeof fname, "s%03d.pgm", i);
            pgm::write(cdir / fname, render_glyph(c, rng, opt.render));
        }
    }
}

} // namespace devrec::synthetic
