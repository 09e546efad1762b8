#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "devrec/pgm.hpp"
#include "devrec/raster.hpp"
#include "test_util.hpp"

using namespace devrec;

namespace {

// Reference mean-of-means iteration, written independently of binarize.
double reference_threshold(const std::vector<std::uint8_t>& px) {
    double t = 128;
    for (int it = 0; it < 64; ++it) {
        std::vector<double> fg, bg;
        for (auto v : px)
            (v < t ? fg : bg).push_back(v);
        if (fg.empty() || bg.empty())
            return t;
        auto mean = [](const std::vector<double>& v) {
            double s = 0;
            for (double x : v)
                s += x;
            return s / static_cast<double>(v.size());
        };
        const double next = (mean(fg) + mean(bg)) / 2;
        const bool done = std::abs(next - t) / t < 0.02;
        t = next;
        if (done)
            break;
    }
    return t;
}

} // namespace

TEST(Binarize, TwoPixelHandIteration) {
    // 128 -> 125 (change 2.34%, continue) -> 125 (change 0, stop)
    const GrayImage img(2, 1, std::vector<std::uint8_t>{10, 240});
    const auto r = binarize_detailed(img);
    EXPECT_DOUBLE_EQ(r.threshold, 125.0);
    EXPECT_EQ(r.iterations, 2);
    EXPECT_FALSE(r.degenerate);
    EXPECT_TRUE(r.image(0, 0));
    EXPECT_FALSE(r.image(1, 0));
}

TEST(Binarize, ExtremesSettleAfterFirstSplit) {
    const GrayImage img(2, 1, std::vector<std::uint8_t>{0, 255});
    const auto r = binarize_detailed(img);
    EXPECT_DOUBLE_EQ(r.threshold, 127.5);
    EXPECT_TRUE(r.image(0, 0));
    EXPECT_FALSE(r.image(1, 0));
}

TEST(Binarize, AllWhiteIsAllBackground) {
    const GrayImage img(4, 3, std::uint8_t{255});
    try {
        binarize(img);
        FAIL() << "expected AllBackground";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::AllBackground);
    }
}

TEST(Binarize, EmptyBackgroundClassFreezesThreshold) {
    const GrayImage img(3, 3, std::uint8_t{50});
    const auto r = binarize_detailed(img);
    EXPECT_TRUE(r.degenerate);
    EXPECT_DOUBLE_EQ(r.threshold, 128.0);
    EXPECT_EQ(r.image.count(), 9u);
}

TEST(Binarize, PixelAtThresholdIsBackground) {
    // threshold stays at 128 when one class is empty; 128 itself is background
    const GrayImage img(2, 1, std::vector<std::uint8_t>{127, 128});
    const auto r = binarize_detailed(img);
    EXPECT_TRUE(r.image(0, 0));
    EXPECT_FALSE(r.image(1, 0));
}

TEST(Binarize, MatchesReferenceAndIsOrderInvariant) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(1, 20), val(0, 255);
    for (int trial = 0; trial < 500; ++trial) {
        const int w = dim(rng), h = dim(rng);
        std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
        for (auto& p : px)
            p = static_cast<std::uint8_t>(val(rng));
        px[0] = 0; // at least one ink pixel survives any threshold
        const auto r = binarize_detailed(GrayImage(w, h, px));
        EXPECT_LE(r.iterations, kMaxThresholdIterations);
        EXPECT_DOUBLE_EQ(r.threshold, reference_threshold(px));

        auto shuffled = px;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_DOUBLE_EQ(binarize_detailed(GrayImage(w, h, shuffled)).threshold, r.threshold);
    }
}

TEST(TightBbox, SinglePixel) {
    BinaryImage img(10, 12);
    img.set(3, 7, true);
    EXPECT_EQ(tight_bbox(img), (Rect{3, 7, 1, 1}));
}

TEST(TightBbox, FullImage) {
    EXPECT_EQ(tight_bbox(BinaryImage(6, 4, true)), (Rect{0, 0, 6, 4}));
}

TEST(TightBbox, EmptyMaskThrows) {
    try {
        tight_bbox(BinaryImage(5, 5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoForeground);
    }
}

TEST(ScaleToCanvas, IdentityOn100Crop) {
    std::mt19937_64 rng(2);
    const auto img = testkit::random_mask(rng, 120, 110, 0.3);
    const Rect box{7, 5, 100, 100};
    const Canvas c = scale_to_canvas(img, box);
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x)
            ASSERT_EQ(c(x, y), img(x + 7, y + 5));
}

TEST(ScaleToCanvas, HalfSizeCropFillsTwoByTwoBlocks) {
    std::mt19937_64 rng(3);
    const auto img = testkit::random_mask(rng, 50, 50, 0.5);
    const Canvas c = scale_to_canvas(img, {0, 0, 50, 50});
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x)
            ASSERT_EQ(c(x, y), img(x / 2, y / 2)) << x << "," << y;
}

TEST(ScaleToCanvas, SinglePixelFillsCanvas) {
    BinaryImage img(3, 3);
    img.set(1, 1, true);
    const Canvas c = scale_to_canvas(img, {1, 1, 1, 1});
    EXPECT_EQ(c.image().count(), 10000u);
}

TEST(ScaleToCanvas, RejectsBoxOutsideImage) {
    EXPECT_THROW(scale_to_canvas(BinaryImage(10, 10), {5, 5, 6, 2}), Error);
}

TEST(ScaleToCanvas, TightCropStaysTight) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dim(1, 100);
    for (int trial = 0; trial < 200; ++trial) {
        auto img = testkit::random_mask(rng, dim(rng), dim(rng), 0.05);
        img.set(0, 0, true);
        const Canvas c = scale_to_canvas(img, tight_bbox(img));
        EXPECT_EQ(tight_bbox(c.image()), (Rect{0, 0, 100, 100}));
    }
}

TEST(Smooth, EmptyStaysEmpty) {
    EXPECT_TRUE(smooth(Canvas()).image().empty());
}

TEST(Smooth, FullStaysFull) {
    const Canvas full(BinaryImage(100, 100, true));
    EXPECT_EQ(smooth(full), full);
}

TEST(Smooth, ClosesOnePixelGapInRing) {
    Canvas ring;
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x) {
            const int d2 = (x - 50) * (x - 50) + (y - 50) * (y - 50);
            if (d2 >= 18 * 18 && d2 <= 19 * 19)
                ring.set(x, y, true);
        }
    // cut a one-pixel gap at the top of the ring
    ASSERT_TRUE(ring(50, 32));
    for (int y = 30; y <= 33; ++y)
        ring.set(50, y, false);
    const Canvas s = smooth(ring);
    for (int y = 31; y <= 33; ++y)
        EXPECT_TRUE(s(50, y));
}

TEST(Smooth, ExtensiveAndClosingIdempotent) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const Canvas c(testkit::random_mask(rng, 100, 100, 0.1));
        const Canvas s = smooth(c);
        for (int y = 0; y < 100; ++y)
            for (int x = 0; x < 100; ++x)
                if (c(x, y)) {
                    ASSERT_TRUE(s(x, y));
                }
        const auto closed = close3x3(dilate3x3(c.image()));
        EXPECT_EQ(close3x3(closed), closed);
    }
}

TEST(Pgm, PlainWithCommentsAndMaxval) {
    std::istringstream in("P2\n# a comment\n3 1\n# another\n15\n0 15 5\n");
    const auto img = pgm::read(in);
    EXPECT_EQ(img.width(), 3);
    EXPECT_EQ(img(0, 0), 0);
    EXPECT_EQ(img(1, 0), 255);
    EXPECT_EQ(img(2, 0), 85);
}

TEST(Pgm, RawRoundTrip) {
    std::mt19937_64 rng(4);
    std::vector<std::uint8_t> px(7 * 5);
    for (auto& p : px)
        p = static_cast<std::uint8_t>(rng());
    const GrayImage img(7, 5, px);
    std::stringstream buf;
    pgm::write(buf, img);
    EXPECT_EQ(pgm::read(buf), img);
}

TEST(Pgm, TruncatedAndForeignFilesAreUnreadable) {
    std::istringstream truncated("P5\n4 4\n255\nabc");
    std::istringstream png("\x89PNG....");
    for (auto* in : {static_cast<std::istream*>(&truncated), static_cast<std::istream*>(&png)}) {
        try {
            pgm::read(*in);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::UnreadableImage);
        }
    }
}
