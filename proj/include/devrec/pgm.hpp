#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "devrec/error.hpp"
#include "devrec/raster.hpp"

namespace devrec::pgm {

namespace detail {

inline void skip_space_and_comments(std::istream& in) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string discard;
            std::getline(in, discard);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

inline int read_header_int(std::istream& in) {
    skip_space_and_comments(in);
    int v = -1;
    if (!(in >> v) || v < 0)
        throw Error(Errc::UnreadableImage, "malformed PGM header");
    return v;
}

} // namespace detail

/// Reads an 8-bit portable graymap, plain (P2) or raw (P5). Samples with a
/// maxval other than 255 are rescaled to [0, 255].
inline GrayImage read(std::istream& in) {
    char magic[2] = {};
    if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
        throw Error(Errc::UnreadableImage, "not a P2/P5 graymap");
    const bool raw = magic[1] == '5';

    const int w = detail::read_header_int(in);
    const int h = detail::read_header_int(in);
    const int maxval = detail::read_header_int(in);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw Error(Errc::UnreadableImage, "unsupported PGM dimensions or maxval");

    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<std::uint8_t> px(n);
    if (raw) {
        // exactly one whitespace byte separates maxval from the raster
        in.get();
        if (!in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(n)))
            throw Error(Errc::UnreadableImage, "truncated P5 raster");
    } else {
        for (auto& p : px) {
            int v = -1;
            detail::skip_space_and_comments(in);
            if (!(in >> v) || v < 0 || v > maxval)
                throw Error(Errc::UnreadableImage, "bad or truncated P2 sample");
            p = static_cast<std::uint8_t>(v);
        }
    }
    if (maxval != 255)
        for (auto& p : px)
            p = static_cast<std::uint8_t>((p * 255 + maxval / 2) / maxval);
    return GrayImage(w, h, std::move(px));
}

inline GrayImage read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::UnreadableImage, "cannot open " + path.string());
    return read(in);
}

inline void write(std::ostream& out, const GrayImage& img) {
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    const auto px = img.pixels();
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

inline void write(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path.string());
    write(out, img);
}

} // namespace devrec::pgm
