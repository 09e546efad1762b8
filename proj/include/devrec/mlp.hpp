#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "devrec/error.hpp"

namespace devrec {

using ClassScores = std::vector<double>;

struct LayerSizes {
    std::size_t input = 0;
    std::size_t hidden = 0;
    std::size_t output = 0;
    friend bool operator==(const LayerSizes&, const LayerSizes&) = default;
};

/// Flat parameter vector layout used by gradients and finite differences:
/// hidden weights (row-major, hidden x input), hidden biases, output weights
/// (row-major, output x hidden), output biases.
struct Gradients {
    std::vector<double> values;
};

/// One-hidden-layer perceptron with logistic activations on both layers.
class Mlp {
public:
    static Mlp init(LayerSizes sizes, std::uint64_t seed) {
        Mlp net(sizes);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-0.5, 0.5);
        for (double& w : net.params_)
            w = dist(rng);
        return net;
    }

    static Mlp zeros(LayerSizes sizes) { return Mlp(sizes); }

    const LayerSizes& sizes() const noexcept { return sizes_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }
    std::span<double> parameters() noexcept { return params_; }
    std::span<const double> parameters() const noexcept { return params_; }

    double hidden_weight(std::size_t h, std::size_t i) const { return params_[h * sizes_.input + i]; }
    double hidden_bias(std::size_t h) const { return params_[hb_offset() + h]; }
    double output_weight(std::size_t o, std::size_t h) const { return params_[ow_offset() + o * sizes_.hidden + h]; }
    double output_bias(std::size_t o) const { return params_[ob_offset() + o]; }

    ClassScores forward(std::span<const double> x) const {
        std::vector<double> hidden;
        return forward(x, hidden);
    }

    /// Forward pass that also exposes the hidden activations.
    ClassScores forward(std::span<const double> x, std::vector<double>& hidden) const {
        if (x.size() != sizes_.input)
            throw Error(Errc::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                     " values, network expects " +
                                                     std::to_string(sizes_.input));
        hidden.assign(sizes_.hidden, 0.0);
        for (std::size_t h = 0; h < sizes_.hidden; ++h) {
            double s = params_[hb_offset() + h];
            const double* w = &params_[h * sizes_.input];
            for (std::size_t i = 0; i < sizes_.input; ++i)
                s += w[i] * x[i];
            hidden[h] = sigmoid(s);
        }
        ClassScores out(sizes_.output);
        for (std::size_t o = 0; o < sizes_.output; ++o) {
            double s = params_[ob_offset() + o];
            const double* w = &params_[ow_offset() + o * sizes_.hidden];
            for (std::size_t h = 0; h < sizes_.hidden; ++h)
                s += w[h] * hidden[h];
            out[o] = sigmoid(s);
        }
        return out;
    }

    /// Gradient of E = 1/2 * sum (target - output)^2 with respect to every
    /// parameter, in the flat layout.
    Gradients backprop(std::span<const double> x, std::span<const double> target) const {
        if (target.size() != sizes_.output)
            throw Error(Errc::DimensionMismatch, "target length does not match output layer");
        std::vector<double> hidden;
        const ClassScores out = forward(x, hidden);

        Gradients g{std::vector<double>(params_.size(), 0.0)};
        std::vector<double> delta_out(sizes_.output);
        for (std::size_t o = 0; o < sizes_.output; ++o)
            delta_out[o] = (out[o] - target[o]) * out[o] * (1.0 - out[o]);

        for (std::size_t o = 0; o < sizes_.output; ++o) {
            double* gw = &g.values[ow_offset() + o * sizes_.hidden];
            for (std::size_t h = 0; h < sizes_.hidden; ++h)
                gw[h] = delta_out[o] * hidden[h];
            g.values[ob_offset() + o] = delta_out[o];
        }
        for (std::size_t h = 0; h < sizes_.hidden; ++h) {
            double back = 0;
            for (std::size_t o = 0; o < sizes_.output; ++o)
                back += delta_out[o] * params_[ow_offset() + o * sizes_.hidden + h];
            const double delta = back * hidden[h] * (1.0 - hidden[h]);
            double* gw = &g.values[h * sizes_.input];
            for (std::size_t i = 0; i < sizes_.input; ++i)
                gw[i] = delta * x[i];
            g.values[hb_offset() + h] = delta;
        }
        return g;
    }

    static double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

    friend bool operator==(const Mlp&, const Mlp&) = default;

private:
    explicit Mlp(LayerSizes sizes) : sizes_(sizes) {
        if (sizes.input == 0 || sizes.hidden == 0 || sizes.output < 2)
            throw Error(Errc::InvalidSizes, "need input >= 1, hidden >= 1 and output >= 2");
        params_.assign(sizes.hidden * sizes.input + sizes.hidden + sizes.output * sizes.hidden +
                           sizes.output,
                       0.0);
    }

    std::size_t hb_offset() const noexcept { return sizes_.hidden * sizes_.input; }
    std::size_t ow_offset() const noexcept { return hb_offset() + sizes_.hidden; }
    std::size_t ob_offset() const noexcept { return ow_offset() + sizes_.output * sizes_.hidden; }

    LayerSizes sizes_;
    std::vector<double> params_;
};

inline std::size_t argmax(std::span<const double> v) {
    // first maximum wins, so ties go to the lowest index
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------
// Training

struct TrainSample {
    std::vector<double> x;
    std::size_t label = 0;
};

struct TrainConfig {
    double learning_rate = 0.8;
    double momentum = 0.7;
    std::size_t max_epochs = 1000;
    /// Training stops once |SSE(epoch-1) - SSE(epoch)| drops below this; 0 disables the rule.
    double sse_tolerance = 1e-4;
    std::uint64_t seed = 1;
    /// Called after every epoch with (epoch, network); returning false stops training.
    std::function<bool(std::size_t, const Mlp&)> on_epoch;
};

inline constexpr double kTargetOn = 0.9;
inline constexpr double kTargetOff = 0.1;

inline std::vector<double> one_hot_target(std::size_t label, std::size_t classes) {
    std::vector<double> t(classes, kTargetOff);
    t[label] = kTargetOn;
    return t;
}

struct TrainResult {
    Mlp net;
    /// Entry 0 is the SSE of the initial network; entry e is the SSE summed
    /// over epoch e while its online updates were applied.
    std::vector<double> sse_history;
    std::size_t epochs_run = 0;
};

namespace detail {

inline void validate_samples(const Mlp& net, std::span<const TrainSample> samples) {
    if (samples.empty())
        throw Error(Errc::EmptyDataset, "no training samples");
    for (const auto& s : samples) {
        if (s.x.size() != net.sizes().input)
            throw Error(Errc::DimensionMismatch, "training sample length does not match input layer");
        if (s.label >= net.sizes().output)
            throw Error(Errc::InvalidArgument, "label outside the output layer");
    }
}

} // namespace detail

inline double dataset_sse(const Mlp& net, std::span<const TrainSample> samples) {
    double sse = 0;
    for (const auto& s : samples) {
        const auto out = net.forward(s.x);
        const auto t = one_hot_target(s.label, out.size());
        for (std::size_t o = 0; o < out.size(); ++o)
            sse += (t[o] - out[o]) * (t[o] - out[o]);
    }
    return sse;
}

/// Online backpropagation with momentum, samples visited in the given order.
inline TrainResult train(Mlp net, std::span<const TrainSample> samples, const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0) || cfg.momentum < 0 || cfg.momentum >= 1)
        throw Error(Errc::InvalidArgument, "need learning_rate > 0 and 0 <= momentum < 1");
    detail::validate_samples(net, samples);

    TrainResult result{net, {dataset_sse(net, samples)}, 0};
    std::vector<double> velocity(net.parameter_count(), 0.0);
    const std::size_t classes = net.sizes().output;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        double sse = 0;
        for (const auto& s : samples) {
            const auto target = one_hot_target(s.label, classes);
            const auto out = net.forward(s.x);
            for (std::size_t o = 0; o < classes; ++o)
                sse += (target[o] - out[o]) * (target[o] - out[o]);

            const auto g = net.backprop(s.x, target);
            auto p = net.parameters();
            for (std::size_t i = 0; i < p.size(); ++i) {
                velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * g.values[i];
                p[i] += velocity[i];
            }
        }
        result.sse_history.push_back(sse);
        result.epochs_run = epoch;

        if (cfg.on_epoch && !cfg.on_epoch(epoch, net))
            break;
        const double prev = result.sse_history[result.sse_history.size() - 2];
        if (cfg.sse_tolerance > 0 && std::abs(prev - sse) < cfg.sse_tolerance)
            break;
    }
    result.net = std::move(net);
    return result;
}

inline double training_accuracy(const Mlp& net, std::span<const TrainSample> samples) {
    if (samples.empty())
        return 0;
    std::size_t hits = 0;
    for (const auto& s : samples)
        hits += argmax(net.forward(s.x)) == s.label;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Gradient check

using GradientFn = std::function<Gradients(const Mlp&, std::span<const double>, std::span<const double>)>;

inline Gradients backprop_gradients(const Mlp& net, std::span<const double> x, std::span<const double> t) {
    return net.backprop(x, t);
}

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Largest relative disagreement between `analytic` and central finite
/// differences of E over all parameters. The denominator is floored at 1e-6
/// so parameters with vanishing gradient compare absolutely.
inline double gradient_check(const Mlp& net, const TrainSample& sample,
                             const GradientFn& analytic = backprop_gradients) {
    const auto target = one_hot_target(sample.label, net.sizes().output);
    const auto loss = [&](const Mlp& m) {
        const auto out = m.forward(sample.x);
        double e = 0;
        for (std::size_t o = 0; o < out.size(); ++o)
            e += 0.5 * (target[o] - out[o]) * (target[o] - out[o]);
        return e;
    };

    const Gradients g = analytic(net, sample.x, target);
    if (g.values.size() != net.parameter_count())
        throw Error(Errc::DimensionMismatch, "gradient has wrong length");

    Mlp probe = net;
    double worst = 0;
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
        const double w = net.parameters()[i];
        probe.parameters()[i] = w + kFiniteDifferenceStep;
        const double up = loss(probe);
        probe.parameters()[i] = w - kFiniteDifferenceStep;
        const double down = loss(probe);
        probe.parameters()[i] = w;

        const double numeric = (up - down) / (2 * kFiniteDifferenceStep);
        const double a = g.values[i];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Model files
//
//   devrec-mlp <version>
//   <input> <hidden> <output>
//   hidden_weights      then <hidden> lines of <input> values
//   hidden_bias         then 1 line of <hidden> values
//   output_weights      then <output> lines of <hidden> values
//   output_bias         then 1 line of <output> values
//   end
//
// Values use the shortest decimal form that reads back to the same double.

inline constexpr int kModelFormatVersion = 1;

inline void save(const Mlp& net, std::ostream& out) {
    const auto& s = net.sizes();
    const auto p = net.parameters();
    auto put = [&](std::size_t offset, std::size_t rows, std::size_t cols) {
        char buf[32];
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const auto res = std::to_chars(buf, buf + sizeof buf, p[offset + r * cols + c]);
                if (c)
                    out << ' ';
                out.write(buf, res.ptr - buf);
            }
            out << '\n';
        }
    };
    out << "devrec-mlp " << kModelFormatVersion << '\n';
    out << s.input << ' ' << s.hidden << ' ' << s.output << '\n';
    std::size_t off = 0;
    out << "hidden_weights\n";
    put(off, s.hidden, s.input);
    off += s.hidden * s.input;
    out << "hidden_bias\n";
    put(off, 1, s.hidden);
    off += s.hidden;
    out << "output_weights\n";
    put(off, s.output, s.hidden);
    off += s.output * s.hidden;
    out << "output_bias\n";
    put(off, 1, s.output);
    out << "end\n";
}

inline Mlp load(std::istream& in) {
    std::string line;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line))
            throw Error(Errc::FormatError, "model file ends early");
        return line;
    };

    {
        std::istringstream hdr(next_line());
        std::string magic;
        int version = 0;
        if (!(hdr >> magic >> version) || magic != "devrec-mlp")
            throw Error(Errc::FormatError, "missing model header");
        if (version != kModelFormatVersion)
            throw Error(Errc::VersionMismatch, "model format version " + std::to_string(version));
    }
    LayerSizes sizes;
    {
        std::istringstream dims(next_line());
        if (!(dims >> sizes.input >> sizes.hidden >> sizes.output))
            throw Error(Errc::FormatError, "bad layer sizes line");
    }
    Mlp net = Mlp::zeros(sizes);
    auto p = net.parameters();

    std::size_t off = 0;
    auto take = [&](const char* section, std::size_t rows, std::size_t cols) {
        if (next_line() != section)
            throw Error(Errc::FormatError, std::string("expected section ") + section);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::string& row = next_line();
            const char* it = row.data();
            const char* end = row.data() + row.size();
            for (std::size_t c = 0; c < cols; ++c) {
                while (it < end && *it == ' ')
                    ++it;
                const auto res = std::from_chars(it, end, p[off++]);
                if (res.ec != std::errc{})
                    throw Error(Errc::FormatError, std::string("bad value in ") + section);
                it = res.ptr;
            }
            if (it != end)
                throw Error(Errc::FormatError, std::string("extra values in ") + section);
        }
    };
    take("hidden_weights", sizes.hidden, sizes.input);
    take("hidden_bias", 1, sizes.hidden);
    take("output_weights", sizes.output, sizes.hidden);
    take("output_bias", 1, sizes.output);
    if (next_line() != "end")
        throw Error(Errc::FormatError, "missing end line");
    return net;
}

inline void save(const Mlp& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path.string());
    save(net, out);
}

inline Mlp load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path.string());
    return load(in);
}

} // namespace devrec
