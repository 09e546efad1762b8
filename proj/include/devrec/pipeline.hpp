#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <exception>
#include <mutex>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "devrec/ensemble.hpp"
#include "devrec/error.hpp"
#include "devrec/features.hpp"
#include "devrec/mlp.hpp"
#include "devrec/pgm.hpp"
#include "devrec/raster.hpp"

namespace devrec {

// ---------------------------------------------------------------------------
// Classifier slots
//
// Slot order follows the voting weights: 0 = chain code, 1 = intersection,
// 2 = shadow.

inline constexpr std::array<FeatureKind, kClassifierCount> kSlotKinds{
    FeatureKind::ChainCode200, FeatureKind::Intersection32, FeatureKind::Shadow16};

inline std::size_t slot_of(FeatureKind k) {
    for (std::size_t i = 0; i < kClassifierCount; ++i)
        if (kSlotKinds[i] == k)
            return i;
    throw Error(Errc::InvalidArgument, "unknown feature kind");
}

/// Intersection counts are scaled by 1/10 so every network sees inputs of
/// roughly unit magnitude; the other two extractors are already in [0, 1].
inline constexpr double kIntersectionInputScale = 0.1;

inline std::vector<double> network_input(const FeatureVector& f) {
    std::vector<double> x = f.values();
    if (f.kind() == FeatureKind::Intersection32)
        for (double& v : x)
            v *= kIntersectionInputScale;
    return x;
}

// ---------------------------------------------------------------------------
// Dataset

struct Sample {
    std::string id;
    std::size_t label = 0;
    std::string label_name;
    std::filesystem::path path;
    std::optional<GrayImage> image;
    std::optional<FeatureSet> features;
};

struct Skipped {
    std::string id;
    std::string reason;
};

struct Dataset {
    std::vector<std::string> class_names;
    std::vector<Sample> samples;
    /// files that could not be decoded
    std::vector<Skipped> unreadable;
    /// decoded images rejected by preprocessing (blank glyphs)
    std::vector<Skipped> rejected;
};

/// One subdirectory per class, sorted by name; files within a class sorted by
/// name. Files that fail to decode are skipped and recorded.
inline Dataset load_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw Error(Errc::EmptyDataset, "dataset root is not a directory: " + root.string());

    std::vector<fs::path> class_dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && e.path().filename().string().front() != '.')
            class_dirs.push_back(e.path());
    std::sort(class_dirs.begin(), class_dirs.end());

    Dataset ds;
    for (const auto& dir : class_dirs) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().filename().string().front() != '.')
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        const std::size_t label = ds.class_names.size();
        const std::string name = dir.filename().string();
        ds.class_names.push_back(name);

        for (const auto& f : files) {
            const std::string id = name + "/" + f.filename().string();
            try {
                ds.samples.push_back({id, label, name, f, pgm::read(f), std::nullopt});
            } catch (const Error& e) {
                ds.unreadable.push_back({id, e.what()});
            }
        }
    }
    if (ds.samples.empty())
        throw Error(Errc::EmptyDataset, "no readable images under " + root.string());
    return ds;
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error)
                            first_error = std::current_exception();
                        next = n;
                    }
                }
            });
    }
    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace detail

/// Runs preprocessing and all three extractors on every sample. Samples whose
/// image is blank are moved to `rejected`.
inline void extract_all(Dataset& ds) {
    std::vector<std::optional<std::string>> failure(ds.samples.size());
    detail::parallel_for(ds.samples.size(), [&](std::size_t i) {
        auto& s = ds.samples[i];
        if (!s.image)
            s.image = pgm::read(s.path);
        try {
            s.features = extract_features(preprocess(*s.image));
        } catch (const Error& e) {
            if (e.code() != Errc::AllBackground && e.code() != Errc::NoForeground)
                throw;
            failure[i] = e.what();
        }
    });

    std::vector<Sample> kept;
    kept.reserve(ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        if (failure[i])
            ds.rejected.push_back({ds.samples[i].id, *failure[i]});
        else
            kept.push_back(std::move(ds.samples[i]));
    }
    ds.samples = std::move(kept);
}

// ---------------------------------------------------------------------------
// Folds

struct FoldSplit {
    std::array<std::vector<std::size_t>, 3> parts;
};

struct Rotation {
    std::array<std::size_t, 2> train;
    std::size_t test;
};

/// Parts {0,1} train / 2 tests, then {0,2} / 1, then {1,2} / 0.
inline constexpr std::array<Rotation, 3> kRotations{{{{0, 1}, 2}, {{0, 2}, 1}, {{1, 2}, 0}}};

/// Stratified three-way split. Each class is shuffled with the seeded
/// generator and dealt round-robin; the dealing position carries over from
/// one class to the next so part sizes differ by at most one.
inline FoldSplit three_fold_split(std::span<const std::size_t> labels, std::uint64_t seed) {
    if (labels.size() < 3)
        throw Error(Errc::TooFewSamples, "need at least 3 samples for 3-fold cross validation");
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(i);

    std::mt19937_64 rng(seed);
    FoldSplit split;
    std::size_t deal = 0;
    for (auto& [label, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i : idx)
            split.parts[deal++ % 3].push_back(i);
    }
    for (auto& p : split.parts)
        std::sort(p.begin(), p.end());
    return split;
}

// ---------------------------------------------------------------------------
// Metrics

inline double topk_accuracy(std::span<const CombinedDecision> decisions,
                            std::span<const std::size_t> labels, std::size_t k) {
    if (decisions.size() != labels.size())
        throw Error(Errc::LengthMismatch, "decisions and labels differ in length");
    if (decisions.empty())
        return 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < decisions.size(); ++i)
        hits += in_top_k(decisions[i], labels[i], k);
    return 100.0 * static_cast<double>(hits) / static_cast<double>(decisions.size());
}

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

/// Rows are true classes, columns the ensemble's top choice.
inline ConfusionMatrix confusion_matrix(std::span<const CombinedDecision> decisions,
                                        std::span<const std::size_t> labels, std::size_t classes) {
    if (decisions.size() != labels.size())
        throw Error(Errc::LengthMismatch, "decisions and labels differ in length");
    ConfusionMatrix m(classes, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (labels[i] >= classes || decisions[i].winner >= classes)
            throw Error(Errc::LengthMismatch, "class index outside the confusion matrix");
        ++m[labels[i]][decisions[i].winner];
    }
    return m;
}

// ---------------------------------------------------------------------------
// Configuration (key=value text)

struct CvConfig {
    std::size_t hidden_shadow = 30;
    std::size_t hidden_chaincode = 70;
    std::size_t hidden_intersection = 20;
    double learning_rate = 0.8;
    double momentum = 0.7;
    std::size_t epochs = 1000;
    double sse_tolerance = 1e-4;
    std::uint64_t seed = 1;
    double calibration_fraction = 0.2;

    std::size_t hidden_for(FeatureKind k) const {
        switch (k) {
        case FeatureKind::Shadow16: return hidden_shadow;
        case FeatureKind::ChainCode200: return hidden_chaincode;
        case FeatureKind::Intersection32: break;
        }
        return hidden_intersection;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T v{};
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc{} || r.ptr != text.data() + text.size())
        throw Error(Errc::FormatError, "bad value for " + std::string(key) + ": '" + std::string(text) + "'");
    return v;
}

/// Splits key=value lines; '#' starts a comment, blank lines are ignored.
inline std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos)
            s = s.substr(0, hash);
        s = trim(s);
        if (s.empty())
            continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::FormatError, "expected key=value, got '" + std::string(s) + "'");
        kv.emplace_back(std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1))));
    }
    return kv;
}

} // namespace detail

inline CvConfig parse_config(std::istream& in) {
    CvConfig c;
    for (const auto& [k, v] : detail::read_key_values(in)) {
        if (k == "hidden.shadow") c.hidden_shadow = detail::parse_number<std::size_t>(k, v);
        else if (k == "hidden.chaincode") c.hidden_chaincode = detail::parse_number<std::size_t>(k, v);
        else if (k == "hidden.intersection") c.hidden_intersection = detail::parse_number<std::size_t>(k, v);
        else if (k == "lr" || k == "learning_rate") c.learning_rate = detail::parse_number<double>(k, v);
        else if (k == "momentum") c.momentum = detail::parse_number<double>(k, v);
        else if (k == "epochs") c.epochs = detail::parse_number<std::size_t>(k, v);
        else if (k == "sse_tolerance") c.sse_tolerance = detail::parse_number<double>(k, v);
        else if (k == "seed") c.seed = detail::parse_number<std::uint64_t>(k, v);
        else if (k == "calibration_fraction") c.calibration_fraction = detail::parse_number<double>(k, v);
        else throw Error(Errc::FormatError, "unknown config key '" + k + "'");
    }
    if (!(c.calibration_fraction > 0 && c.calibration_fraction < 1))
        throw Error(Errc::FormatError, "calibration_fraction must lie in (0, 1)");
    return c;
}

inline CvConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open config " + path.string());
    return parse_config(in);
}

inline TrainConfig train_config(const CvConfig& c, std::uint64_t seed) {
    TrainConfig t;
    t.learning_rate = c.learning_rate;
    t.momentum = c.momentum;
    t.max_epochs = c.epochs;
    t.sse_tolerance = c.sse_tolerance;
    t.seed = seed;
    return t;
}

// ---------------------------------------------------------------------------
// Recognition with three trained networks

class Recognizer {
public:
    /// `nets` may be given in any order; each is matched to its extractor by input size.
    Recognizer(std::vector<Mlp> nets, EnsembleWeights weights) : weights_(weights) {
        std::array<bool, kClassifierCount> seen{};
        for (auto& n : nets) {
            const auto kind = feature_kind_from_length(n.sizes().input);
            if (!kind)
                throw Error(Errc::DimensionMismatch, "model input size matches no extractor");
            const std::size_t slot = slot_of(*kind);
            if (seen[slot])
                throw Error(Errc::InvalidArgument, "two models for the same extractor");
            seen[slot] = true;
            nets_[slot] = std::move(n);
        }
        if (std::count(seen.begin(), seen.end(), true) != 3)
            throw Error(Errc::InvalidArgument, "need one model per extractor");
        const auto classes = nets_[0]->sizes().output;
        for (const auto& n : nets_)
            if (n->sizes().output != classes)
                throw Error(Errc::LengthMismatch, "models disagree on class count");
    }

    ScoreTriple scores(const FeatureSet& f) const {
        ScoreTriple s;
        for (std::size_t k = 0; k < kClassifierCount; ++k)
            s[k] = nets_[k]->forward(network_input(f.get(kSlotKinds[k])));
        return s;
    }

    CombinedDecision classify(const FeatureSet& f) const { return combine(scores(f), weights_); }
    CombinedDecision classify(const GrayImage& img) const {
        return classify(extract_features(preprocess(img)));
    }

    const EnsembleWeights& weights() const noexcept { return weights_; }

private:
    std::array<std::optional<Mlp>, kClassifierCount> nets_;
    EnsembleWeights weights_;
};

// ---------------------------------------------------------------------------
// Cross validation

struct FoldReport {
    std::size_t train_size = 0;
    std::size_t fit_size = 0;
    std::size_t calibration_size = 0;
    std::size_t test_size = 0;
    std::array<std::size_t, kClassifierCount> epochs{};
    /// d_k: top-1 accuracy of each classifier on the calibration slice, percent
    std::array<double, kClassifierCount> calibration_accuracy{};
    EnsembleWeights weights;
    std::array<std::size_t, kClassifierCount> classifier_hits{};
    std::vector<std::size_t> topk_hits;
    std::size_t union_hits = 0;
    ConfusionMatrix confusion;

    double pct(std::size_t hits) const {
        return test_size ? 100.0 * static_cast<double>(hits) / static_cast<double>(test_size) : 0.0;
    }
    double classifier_accuracy(std::size_t k) const { return pct(classifier_hits[k]); }
    double topk_accuracy(std::size_t k) const { return pct(topk_hits.at(k - 1)); }
    double union_accuracy() const { return pct(union_hits); }
};

struct EvalReport {
    CvConfig config;
    std::vector<std::string> class_names;
    std::size_t samples = 0;
    std::vector<Skipped> unreadable;
    std::vector<Skipped> rejected;
    std::array<FoldReport, 3> folds;

    std::size_t tested() const {
        std::size_t n = 0;
        for (const auto& f : folds)
            n += f.test_size;
        return n;
    }

    double aggregate(auto&& hits_of) const {
        std::size_t hits = 0;
        for (const auto& f : folds)
            hits += hits_of(f);
        const std::size_t n = tested();
        return n ? 100.0 * static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    }

    double classifier_accuracy(std::size_t k) const {
        return aggregate([k](const FoldReport& f) { return f.classifier_hits[k]; });
    }
    double topk_accuracy(std::size_t k) const {
        return aggregate([k](const FoldReport& f) { return f.topk_hits.at(k - 1); });
    }
    double union_accuracy() const {
        return aggregate([](const FoldReport& f) { return f.union_hits; });
    }
    std::size_t max_k() const { return folds[0].topk_hits.size(); }

    /// Weights derived from the calibration accuracies averaged over folds.
    EnsembleWeights aggregate_weights() const {
        std::array<double, kClassifierCount> d{};
        for (std::size_t k = 0; k < kClassifierCount; ++k) {
            for (const auto& f : folds)
                d[k] += f.calibration_accuracy[k];
            d[k] /= 3.0;
        }
        return derive_weights(d);
    }

    ConfusionMatrix confusion() const {
        const std::size_t m = class_names.size();
        ConfusionMatrix c(m, std::vector<std::size_t>(m, 0));
        for (const auto& f : folds)
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    c[i][j] += f.confusion[i][j];
        return c;
    }
};

inline constexpr std::size_t kMaxReportedK = 5;

/// Three-fold cross validation over an already extracted dataset.
inline EvalReport run_cv(const Dataset& ds, const CvConfig& cfg) {
    const std::size_t m = ds.class_names.size();
    if (m < 2)
        throw Error(Errc::TooFewClasses, "need at least two classes");
    for (const auto& s : ds.samples)
        if (!s.features)
            throw Error(Errc::InvalidArgument, "run extract_all before run_cv");

    std::vector<std::size_t> labels;
    for (const auto& s : ds.samples)
        labels.push_back(s.label);
    {
        std::vector<bool> present(m, false);
        for (auto l : labels)
            present[l] = true;
        if (std::count(present.begin(), present.end(), true) < 2)
            throw Error(Errc::TooFewClasses, "need samples from at least two classes");
    }
    const FoldSplit split = three_fold_split(labels, cfg.seed);

    EvalReport report;
    report.config = cfg;
    report.class_names = ds.class_names;
    report.samples = ds.samples.size();
    report.unreadable = ds.unreadable;
    report.rejected = ds.rejected;

    for (std::size_t r = 0; r < kRotations.size(); ++r) {
        const Rotation& rot = kRotations[r];
        FoldReport& fold = report.folds[r];

        std::vector<std::size_t> train_idx;
        for (auto p : rot.train)
            train_idx.insert(train_idx.end(), split.parts[p].begin(), split.parts[p].end());
        std::sort(train_idx.begin(), train_idx.end());
        std::mt19937_64 rng(cfg.seed * 1000003u + r + 1);
        std::shuffle(train_idx.begin(), train_idx.end(), rng);

        const std::size_t n_train = train_idx.size();
        if (n_train < 2)
            throw Error(Errc::TooFewSamples, "training part too small for a calibration slice");
        std::size_t n_cal = static_cast<std::size_t>(std::lround(cfg.calibration_fraction * n_train));
        n_cal = std::clamp<std::size_t>(n_cal, 1, n_train - 1);
        const std::size_t n_fit = n_train - n_cal;

        fold.train_size = n_train;
        fold.fit_size = n_fit;
        fold.calibration_size = n_cal;

        auto samples_for = [&](FeatureKind kind, std::size_t from, std::size_t to) {
            std::vector<TrainSample> out;
            for (std::size_t i = from; i < to; ++i) {
                const Sample& s = ds.samples[train_idx[i]];
                out.push_back({network_input(s.features->get(kind)), s.label});
            }
            return out;
        };

        // the three networks are independent jobs
        std::array<std::future<TrainResult>, kClassifierCount> jobs;
        for (std::size_t k = 0; k < kClassifierCount; ++k) {
            jobs[k] = std::async(std::launch::async, [&, k] {
                const FeatureKind kind = kSlotKinds[k];
                const auto fit = samples_for(kind, 0, n_fit);
                const std::uint64_t seed = cfg.seed * 7919u + r * 31u + k;
                Mlp net = Mlp::init({feature_length(kind), cfg.hidden_for(kind), m}, seed);
                return train(std::move(net), fit, train_config(cfg, seed));
            });
        }
        std::vector<Mlp> nets;
        for (std::size_t k = 0; k < kClassifierCount; ++k) {
            TrainResult res = jobs[k].get();
            fold.epochs[k] = res.epochs_run;
            const auto cal = samples_for(kSlotKinds[k], n_fit, n_train);
            fold.calibration_accuracy[k] = training_accuracy(res.net, cal);
            nets.push_back(std::move(res.net));
        }
        fold.weights = derive_weights(fold.calibration_accuracy);
        const Recognizer rec(std::move(nets), fold.weights);

        const auto& test = split.parts[rot.test];
        const std::size_t max_k = std::min(kMaxReportedK, m);
        fold.test_size = test.size();
        fold.topk_hits.assign(max_k, 0);
        std::vector<CombinedDecision> decisions;
        std::vector<std::size_t> test_labels;
        for (std::size_t idx : test) {
            const Sample& s = ds.samples[idx];
            const ScoreTriple sc = rec.scores(*s.features);
            for (std::size_t k = 0; k < kClassifierCount; ++k)
                fold.classifier_hits[k] += argmax(sc[k]) == s.label;
            fold.union_hits += union_top1_hit(sc, s.label);
            CombinedDecision d = combine(sc, fold.weights);
            for (std::size_t k = 1; k <= max_k; ++k)
                fold.topk_hits[k - 1] += in_top_k(d, s.label, k);
            decisions.push_back(std::move(d));
            test_labels.push_back(s.label);
        }
        fold.confusion = confusion_matrix(decisions, test_labels, m);
    }
    return report;
}

inline EvalReport run_cv(const std::filesystem::path& root, const CvConfig& cfg) {
    Dataset ds = load_dataset(root);
    extract_all(ds);
    return run_cv(ds, cfg);
}

// ---------------------------------------------------------------------------
// Report file: one header line, key=value lines, then the aggregate
// confusion matrix as CSV with the class names as header row.

inline constexpr std::string_view kReportHeader = "# devrec cross-validation report v1";

namespace detail {

inline std::string fixed6(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << v;
    return s.str();
}

} // namespace detail

inline void write_report(std::ostream& out, const EvalReport& r) {
    using detail::fixed6;
    const auto& c = r.config;
    out << kReportHeader << '\n';
    out << "config.hidden.shadow=" << c.hidden_shadow << '\n';
    out << "config.hidden.chaincode=" << c.hidden_chaincode << '\n';
    out << "config.hidden.intersection=" << c.hidden_intersection << '\n';
    out << "config.learning_rate=" << format_double(c.learning_rate) << '\n';
    out << "config.momentum=" << format_double(c.momentum) << '\n';
    out << "config.epochs=" << c.epochs << '\n';
    out << "config.sse_tolerance=" << format_double(c.sse_tolerance) << '\n';
    out << "config.seed=" << c.seed << '\n';
    out << "config.calibration_fraction=" << format_double(c.calibration_fraction) << '\n';
    out << "classes=" << r.class_names.size() << '\n';
    out << "samples=" << r.samples << '\n';
    out << "unreadable=" << r.unreadable.size() << '\n';
    for (const auto& s : r.unreadable)
        out << "unreadable.file=" << s.id << '\n';
    out << "rejected=" << r.rejected.size() << '\n';
    for (const auto& s : r.rejected)
        out << "rejected.file=" << s.id << '\n';

    for (std::size_t i = 0; i < r.folds.size(); ++i) {
        const auto& f = r.folds[i];
        const std::string p = "fold" + std::to_string(i + 1) + ".";
        out << p << "train=" << f.train_size << '\n';
        out << p << "fit=" << f.fit_size << '\n';
        out << p << "calibration=" << f.calibration_size << '\n';
        out << p << "test=" << f.test_size << '\n';
        for (std::size_t k = 0; k < kClassifierCount; ++k) {
            const std::string tag(feature_tag(kSlotKinds[k]));
            out << p << "epochs." << tag << '=' << f.epochs[k] << '\n';
            out << p << "calibration_accuracy." << tag << '=' << fixed6(f.calibration_accuracy[k]) << '\n';
            out << p << "weight." << tag << '=' << format_double(f.weights.omega[k]) << '\n';
            out << p << "accuracy." << tag << '=' << fixed6(f.classifier_accuracy(k)) << '\n';
        }
        for (std::size_t k = 1; k <= f.topk_hits.size(); ++k)
            out << p << "top" << k << '=' << fixed6(f.topk_accuracy(k)) << '\n';
        out << p << "union=" << fixed6(f.union_accuracy()) << '\n';
    }

    const auto w = r.aggregate_weights();
    out << "aggregate.test=" << r.tested() << '\n';
    for (std::size_t k = 0; k < kClassifierCount; ++k) {
        const std::string tag(feature_tag(kSlotKinds[k]));
        out << "aggregate.calibration_accuracy." << tag << '=' << fixed6(w.accuracy[k]) << '\n';
        out << "aggregate.weight." << tag << '=' << format_double(w.omega[k]) << '\n';
        out << "aggregate.accuracy." << tag << '=' << fixed6(r.classifier_accuracy(k)) << '\n';
    }
    for (std::size_t k = 1; k <= r.max_k(); ++k)
        out << "aggregate.top" << k << '=' << fixed6(r.topk_accuracy(k)) << '\n';
    out << "aggregate.union=" << fixed6(r.union_accuracy()) << '\n';

    out << "confusion";
    for (const auto& n : r.class_names)
        out << ',' << n;
    out << '\n';
    const auto cm = r.confusion();
    for (std::size_t i = 0; i < cm.size(); ++i) {
        out << r.class_names[i];
        for (auto v : cm[i])
            out << ',' << v;
        out << '\n';
    }
}

inline void write_report(const std::filesystem::path& path, const EvalReport& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot write report " + path.string());
    write_report(out, r);
}

/// Reads the aggregate voting weights and the class names back from a report.
struct ReportSummary {
    EnsembleWeights weights;
    std::vector<std::string> class_names;
};

inline ReportSummary read_report_summary(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader)
        throw Error(Errc::FormatError, "not a cross-validation report");
    std::array<std::optional<double>, kClassifierCount> acc;
    std::array<std::optional<double>, kClassifierCount> omega;
    ReportSummary out;
    while (std::getline(in, line)) {
        if (line.rfind("confusion,", 0) == 0) {
            std::string_view rest = std::string_view(line).substr(10);
            while (true) {
                const auto comma = rest.find(',');
                out.class_names.emplace_back(rest.substr(0, comma));
                if (comma == std::string_view::npos)
                    break;
                rest.remove_prefix(comma + 1);
            }
            break;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::FormatError, "bad report line '" + line + "'");
        const std::string_view key = std::string_view(line).substr(0, eq);
        const std::string_view val = std::string_view(line).substr(eq + 1);
        for (std::size_t k = 0; k < kClassifierCount; ++k) {
            const std::string tag(feature_tag(kSlotKinds[k]));
            if (key == "aggregate.weight." + tag)
                omega[k] = detail::parse_number<double>(key, val);
            else if (key == "aggregate.calibration_accuracy." + tag)
                acc[k] = detail::parse_number<double>(key, val);
        }
    }
    for (std::size_t k = 0; k < kClassifierCount; ++k) {
        if (!omega[k] || !acc[k])
            throw Error(Errc::FormatError, "report lacks aggregate weights");
        out.weights.omega[k] = *omega[k];
        out.weights.accuracy[k] = *acc[k];
    }
    return out;
}

inline ReportSummary read_report_summary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open report " + path.string());
    return read_report_summary(in);
}

} // namespace devrec
