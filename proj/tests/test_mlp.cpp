#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "devrec/mlp.hpp"

using namespace devrec;

namespace {

const std::vector<TrainSample> kXor{{{0, 0}, 0}, {{0, 1}, 1}, {{1, 0}, 1}, {{1, 1}, 0}};
constexpr std::uint64_t kXorSeed = 1;

std::vector<double> random_input(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> x(n);
    for (auto& v : x)
        v = u(rng);
    return x;
}

// Half squared error written out directly, for finite differences in the tests.
double half_sse(const Mlp& net, const std::vector<double>& x, std::size_t label) {
    const auto out = net.forward(x);
    double e = 0;
    for (std::size_t o = 0; o < out.size(); ++o) {
        const double t = o == label ? 0.9 : 0.1;
        e += 0.5 * (t - out[o]) * (t - out[o]);
    }
    return e;
}

std::vector<double> numeric_gradient(const Mlp& net, const std::vector<double>& x, std::size_t label) {
    Mlp probe = net;
    std::vector<double> g(net.parameter_count());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = probe.parameters()[i];
        probe.parameters()[i] = w + 1e-6;
        const double up = half_sse(probe, x, label);
        probe.parameters()[i] = w - 1e-6;
        const double down = half_sse(probe, x, label);
        probe.parameters()[i] = w;
        g[i] = (up - down) / 2e-6;
    }
    return g;
}

} // namespace

TEST(MlpInit, SameSeedSameWeights) {
    const auto a = Mlp::init({32, 20, 49}, 42);
    const auto b = Mlp::init({32, 20, 49}, 42);
    const auto c = Mlp::init({32, 20, 49}, 43);
    EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
    EXPECT_FALSE(std::equal(a.parameters().begin(), a.parameters().end(), c.parameters().begin()));
    EXPECT_EQ(a.parameter_count(), 32u * 20 + 20 + 20 * 49 + 49);
    for (double w : a.parameters()) {
        EXPECT_GE(w, -0.5);
        EXPECT_LE(w, 0.5);
    }
}

TEST(MlpInit, RejectsDegenerateSizes) {
    for (LayerSizes s : {LayerSizes{2, 0, 2}, LayerSizes{0, 3, 2}, LayerSizes{2, 3, 1}}) {
        try {
            Mlp::init(s, 1);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::InvalidSizes);
        }
    }
}

TEST(MlpForward, ZeroNetworkGivesOneHalf) {
    const auto net = Mlp::zeros({5, 3, 4});
    EXPECT_EQ(net.forward(std::vector<double>{1, -2, 3, 0.5, 9}), std::vector<double>(4, 0.5));
}

TEST(MlpForward, TinyNetByHand) {
    // 1-1-1 with weights 1 and biases 0; a second output keeps n_out >= 2
    auto net = Mlp::zeros({1, 1, 2});
    net.parameters()[0] = 1; // hidden weight
    net.parameters()[2] = 1; // first output weight
    const auto out = net.forward(std::vector<double>{0});
    EXPECT_NEAR(out[0], 1 / (1 + std::exp(-0.5)), 1e-15);
    EXPECT_NEAR(out[0], 0.6225, 5e-5);
}

TEST(MlpForward, WrongInputLength) {
    try {
        Mlp::init({3, 2, 2}, 1).forward(std::vector<double>{1, 2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DimensionMismatch);
    }
}

TEST(MlpForward, OutputsStrictlyInsideUnitInterval) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto net = Mlp::init({6, 5, 4}, trial);
        for (double o : net.forward(random_input(rng, 6))) {
            EXPECT_GT(o, 0);
            EXPECT_LT(o, 1);
        }
    }
}

TEST(MlpTrain, XorConverges) {
    TrainConfig cfg;
    cfg.max_epochs = 5000;
    cfg.sse_tolerance = 0;
    std::size_t solved_at = 0;
    cfg.on_epoch = [&](std::size_t epoch, const Mlp& net) {
        if (training_accuracy(net, kXor) == 100.0) {
            solved_at = epoch;
            return false;
        }
        return true;
    };
    const auto r = train(Mlp::init({2, 4, 2}, kXorSeed), kXor, cfg);
    EXPECT_GT(solved_at, 0u);
    EXPECT_LE(solved_at, 5000u);
    EXPECT_EQ(training_accuracy(r.net, kXor), 100.0);
}

TEST(MlpTrain, ZeroEpochsLeavesNetworkUnchanged) {
    TrainConfig cfg;
    cfg.max_epochs = 0;
    const auto net = Mlp::init({2, 4, 2}, 5);
    const auto r = train(net, kXor, cfg);
    EXPECT_EQ(r.epochs_run, 0u);
    EXPECT_EQ(r.sse_history.size(), 1u);
    EXPECT_TRUE(std::equal(net.parameters().begin(), net.parameters().end(), r.net.parameters().begin()));
}

TEST(MlpTrain, SingleSampleSseSettlesMonotonically) {
    const std::vector<TrainSample> one{{{0.3, -0.7, 0.2}, 1}};
    TrainConfig cfg;
    cfg.max_epochs = 300;
    cfg.sse_tolerance = 0;
    const auto r = train(Mlp::init({3, 4, 3}, 11), one, cfg);
    ASSERT_EQ(r.sse_history.size(), 301u);
    for (std::size_t e = r.sse_history.size() - 10; e < r.sse_history.size(); ++e)
        EXPECT_LE(r.sse_history[e], r.sse_history[e - 1]);
    EXPECT_LT(r.sse_history.back(), r.sse_history.front());
}

TEST(MlpTrain, SeparableSetLearns) {
    std::mt19937_64 rng(12);
    std::vector<TrainSample> data;
    for (int i = 0; i < 40; ++i) {
        auto x = random_input(rng, 2);
        data.push_back({x, x[0] + 0.5 * x[1] > 0 ? 1u : 0u});
    }
    TrainConfig cfg;
    cfg.max_epochs = 200;
    cfg.sse_tolerance = 0;
    const auto r = train(Mlp::init({2, 3, 2}, 4), data, cfg);
    ASSERT_EQ(r.sse_history.size(), 201u);
    EXPECT_LT(r.sse_history[200], r.sse_history[0]);
}

TEST(MlpTrain, ToleranceStopsEarly) {
    TrainConfig cfg;
    cfg.max_epochs = 100000;
    cfg.sse_tolerance = 1e-4;
    const auto r = train(Mlp::init({2, 4, 2}, kXorSeed), kXor, cfg);
    ASSERT_LT(r.epochs_run, 100000u);
    const auto n = r.sse_history.size();
    EXPECT_LT(std::abs(r.sse_history[n - 1] - r.sse_history[n - 2]), 1e-4);
}

TEST(MlpTrain, Deterministic) {
    TrainConfig cfg;
    cfg.max_epochs = 50;
    const auto a = train(Mlp::init({2, 4, 2}, 3), kXor, cfg);
    const auto b = train(Mlp::init({2, 4, 2}, 3), kXor, cfg);
    EXPECT_EQ(a.sse_history, b.sse_history);
    EXPECT_TRUE(std::equal(a.net.parameters().begin(), a.net.parameters().end(), b.net.parameters().begin()));
}

TEST(MlpTrain, BadInputs) {
    const auto net = Mlp::init({2, 3, 2}, 1);
    auto code_of = [&](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::IoError;
    };
    EXPECT_EQ(code_of([&] { train(net, {}, {}); }), Errc::EmptyDataset);
    const std::vector<TrainSample> short_x{{{1}, 0}};
    EXPECT_EQ(code_of([&] { train(net, short_x, {}); }), Errc::DimensionMismatch);
    const std::vector<TrainSample> bad_label{{{1, 2}, 2}};
    EXPECT_EQ(code_of([&] { train(net, bad_label, {}); }), Errc::InvalidArgument);
}

TEST(GradientCheck, BackpropMatchesFiniteDifferences) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::size_t> in(1, 10), hid(1, 8), out(2, 5);
    for (int trial = 0; trial < 25; ++trial) {
        const LayerSizes s{in(rng), hid(rng), out(rng)};
        const auto net = Mlp::init(s, rng());
        const TrainSample sample{random_input(rng, s.input), rng() % s.output};
        EXPECT_LT(gradient_check(net, sample), 1e-4);

        const auto numeric = numeric_gradient(net, sample.x, sample.label);
        const auto analytic = net.backprop(sample.x, one_hot_target(sample.label, s.output)).values;
        for (std::size_t i = 0; i < numeric.size(); ++i)
            EXPECT_NEAR(analytic[i], numeric[i], 1e-7);
    }
}

TEST(GradientCheck, ZeroGradientAtExactTarget) {
    // zero output weights and output biases at logit(target) reproduce the target exactly
    auto net = Mlp::init({3, 2, 2}, 9);
    const std::size_t ow = 3 * 2 + 2;
    for (std::size_t i = ow; i < ow + 4; ++i)
        net.parameters()[i] = 0;
    net.parameters()[ow + 4] = std::log(0.9 / 0.1);
    net.parameters()[ow + 5] = std::log(0.1 / 0.9);
    const std::vector<double> x{0.2, -0.4, 0.9};
    for (double g : net.backprop(x, one_hot_target(0, 2)).values)
        EXPECT_NEAR(g, 0, 1e-8);
    for (double g : numeric_gradient(net, x, 0))
        EXPECT_NEAR(g, 0, 1e-8);
}

TEST(GradientCheck, SignFlipIsCaught) {
    const auto net = Mlp::init({4, 3, 3}, 2);
    const TrainSample sample{{0.1, 0.5, -0.3, 0.8}, 2};
    const GradientFn flipped = [](const Mlp& n, std::span<const double> x, std::span<const double> t) {
        auto g = n.backprop(x, t);
        for (auto& v : g.values)
            v = -v;
        return g;
    };
    EXPECT_GT(gradient_check(net, sample, flipped), 1.0);
}

TEST(ModelFile, RoundTripIsBitExact) {
    std::mt19937_64 rng(31);
    const auto net = Mlp::init({7, 5, 4}, 77);
    std::stringstream buf;
    save(net, buf);
    const auto back = load(buf);
    EXPECT_EQ(back.sizes(), net.sizes());
    for (int i = 0; i < 100; ++i) {
        const auto x = random_input(rng, 7);
        EXPECT_EQ(back.forward(x), net.forward(x));
    }
}

TEST(ModelFile, HeaderLayout) {
    std::stringstream buf;
    save(Mlp::zeros({2, 1, 2}), buf);
    std::string first, second;
    std::getline(buf, first);
    std::getline(buf, second);
    EXPECT_EQ(first, "devrec-mlp 1");
    EXPECT_EQ(second, "2 1 2");
}

TEST(ModelFile, TruncatedIsFormatError) {
    std::stringstream buf;
    save(Mlp::init({4, 3, 2}, 1), buf);
    const std::string text = buf.str();
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, text.size() / 2, text.size() - 8}) {
        std::istringstream in(text.substr(0, cut));
        try {
            load(in);
            FAIL() << "cut at " << cut;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::FormatError) << "cut at " << cut;
        }
    }
}

TEST(ModelFile, FutureVersionRejected) {
    std::stringstream buf;
    save(Mlp::init({2, 2, 2}, 1), buf);
    std::string text = buf.str();
    text.replace(0, text.find('\n'), "devrec-mlp 99");
    std::istringstream in(text);
    try {
        load(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::VersionMismatch);
    }
}
