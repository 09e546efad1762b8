// Command-line front end: feature extraction, single-network training,
// cross validation and ensemble prediction.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "devrec/devrec.hpp"

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kTraining = 3 };

int report_error(const devrec::Error& e, int code) {
    std::cerr << "devrec: " << e.what() << '\n';
    return code;
}

int run_extract(const std::string& data, const std::string& out_path) {
    devrec::Dataset ds = devrec::load_dataset(data);
    devrec::extract_all(ds);

    std::ofstream out(out_path);
    if (!out)
        throw devrec::Error(devrec::Errc::IoError, "cannot write " + out_path);
    for (const auto& s : ds.samples)
        for (auto kind : {devrec::FeatureKind::Shadow16, devrec::FeatureKind::ChainCode200,
                          devrec::FeatureKind::Intersection32})
            out << devrec::format_feature_line(static_cast<int>(s.label), s.features->get(kind)) << '\n';

    std::cerr << "extracted " << ds.samples.size() << " samples, " << ds.class_names.size()
              << " classes, " << ds.rejected.size() << " rejected, " << ds.unreadable.size()
              << " unreadable\n";
    for (const auto& s : ds.unreadable)
        std::cerr << "  unreadable: " << s.id << " (" << s.reason << ")\n";
    for (const auto& s : ds.rejected)
        std::cerr << "  rejected: " << s.id << " (" << s.reason << ")\n";
    return kOk;
}

struct TrainArgs {
    std::string features;
    std::string classifier;
    std::size_t hidden = 0;
    std::size_t epochs = 1000;
    std::uint64_t seed = 1;
    std::size_t classes = 0;
    double learning_rate = 0.8;
    double momentum = 0.7;
    double sse_tolerance = 1e-4;
    std::string out;
};

int run_train(const TrainArgs& a) {
    const auto kind = a.classifier == "shadow"      ? devrec::FeatureKind::Shadow16
                      : a.classifier == "chaincode" ? devrec::FeatureKind::ChainCode200
                                                    : devrec::FeatureKind::Intersection32;
    std::vector<devrec::TrainSample> samples;
    std::size_t max_label = 0;
    try {
        std::ifstream in(a.features);
        if (!in)
            throw devrec::Error(devrec::Errc::IoError, "cannot open " + a.features);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            auto rec = devrec::parse_feature_line(line);
            if (rec.features.kind() != kind)
                continue;
            max_label = std::max<std::size_t>(max_label, static_cast<std::size_t>(rec.label));
            samples.push_back({devrec::network_input(rec.features), static_cast<std::size_t>(rec.label)});
        }
        if (samples.empty())
            throw devrec::Error(devrec::Errc::EmptyDataset, "no " + a.classifier + " vectors in " + a.features);
    } catch (const devrec::Error& e) {
        return report_error(e, kData);
    }

    const std::size_t classes = a.classes ? a.classes : std::max<std::size_t>(2, max_label + 1);
    const std::size_t hidden = a.hidden ? a.hidden : devrec::CvConfig{}.hidden_for(kind);
    try {
        devrec::TrainConfig cfg;
        cfg.learning_rate = a.learning_rate;
        cfg.momentum = a.momentum;
        cfg.max_epochs = a.epochs;
        cfg.sse_tolerance = a.sse_tolerance;
        cfg.seed = a.seed;
        auto net = devrec::Mlp::init({devrec::feature_length(kind), hidden, classes}, a.seed);
        auto res = devrec::train(std::move(net), samples, cfg);
        devrec::save(res.net, std::filesystem::path(a.out));
        std::cerr << "trained " << a.classifier << " network " << devrec::feature_length(kind) << '-'
                  << hidden << '-' << classes << " for " << res.epochs_run << " epochs, final SSE "
                  << res.sse_history.back() << ", training accuracy "
                  << devrec::training_accuracy(res.net, samples) << "%\n";
    } catch (const devrec::Error& e) {
        return report_error(e, e.code() == devrec::Errc::IoError ? kData : kTraining);
    }
    return kOk;
}

int run_cv(const std::string& data, const std::string& config_path, const std::string& report_path) {
    devrec::CvConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = devrec::load_config(config_path);
        } catch (const devrec::Error& e) {
            return report_error(e, e.code() == devrec::Errc::IoError ? kData : kUsage);
        }
    }
    devrec::Dataset ds = devrec::load_dataset(data);
    devrec::extract_all(ds);

    devrec::EvalReport report;
    try {
        report = devrec::run_cv(ds, cfg);
    } catch (const devrec::Error& e) {
        const auto c = e.code();
        const bool data_error = c == devrec::Errc::TooFewClasses || c == devrec::Errc::TooFewSamples;
        return report_error(e, data_error ? kData : kTraining);
    }
    devrec::write_report(std::filesystem::path(report_path), report);

    std::printf("samples %zu, tested %zu, rejected %zu, unreadable %zu\n", report.samples,
                report.tested(), report.rejected.size(), report.unreadable.size());
    for (std::size_t k = 0; k < devrec::kClassifierCount; ++k)
        std::printf("  %-13s top-1 %7.3f%%\n", std::string(devrec::feature_tag(devrec::kSlotKinds[k])).c_str(),
                    report.classifier_accuracy(k));
    for (std::size_t k = 1; k <= report.max_k(); ++k)
        std::printf("  ensemble      top-%zu %7.3f%%\n", k, report.topk_accuracy(k));
    std::printf("  union         top-1 %7.3f%%\n", report.union_accuracy());
    return kOk;
}

int run_predict(const std::vector<std::string>& models, const std::string& report_path,
                const std::string& image_path, std::size_t top) {
    std::vector<devrec::Mlp> nets;
    for (const auto& m : models)
        nets.push_back(devrec::load(std::filesystem::path(m)));
    const auto summary = devrec::read_report_summary(std::filesystem::path(report_path));
    const devrec::Recognizer rec(std::move(nets), summary.weights);
    const auto img = devrec::pgm::read(std::filesystem::path(image_path));
    const auto decision = rec.classify(img);

    const std::size_t m = decision.ranking.size();
    if (!summary.class_names.empty() && summary.class_names.size() != m)
        throw devrec::Error(devrec::Errc::LengthMismatch, "report and models disagree on class count");
    const auto best = devrec::top_k(decision, std::min(top, m));
    for (std::size_t r = 0; r < best.size(); ++r) {
        const std::size_t c = best[r];
        const std::string name = summary.class_names.empty() ? std::to_string(c) : summary.class_names[c];
        std::printf("%zu %zu %s %.6f\n", r + 1, c, name.c_str(), decision.fused[c]);
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline handwritten character recognition with three MLPs and weighted voting"};
    app.require_subcommand(1);

    std::string data, out, features, config, report, image;
    auto* extract = app.add_subcommand("extract", "Write shadow, chain-code and intersection features for a dataset");
    extract->add_option("--data", data, "Dataset root (one directory per class)")->required();
    extract->add_option("--out", out, "Feature dump file")->required();

    TrainArgs targs;
    auto* train = app.add_subcommand("train", "Train one network from a feature dump");
    train->add_option("--features", targs.features, "Feature dump file")->required();
    train->add_option("--classifier", targs.classifier, "Feature set")
        ->required()
        ->check(CLI::IsMember({"shadow", "chaincode", "intersection"}));
    train->add_option("--hidden", targs.hidden, "Hidden neurons (default 30/70/20 for shadow/chaincode/intersection)");
    train->add_option("--epochs", targs.epochs, "Maximum epochs")->capture_default_str();
    train->add_option("--seed", targs.seed, "Initialization seed")->capture_default_str();
    train->add_option("--classes", targs.classes, "Output neurons (default: largest label + 1)");
    train->add_option("--lr", targs.learning_rate, "Learning rate")->capture_default_str();
    train->add_option("--momentum", targs.momentum, "Momentum")->capture_default_str();
    train->add_option("--sse-tolerance", targs.sse_tolerance, "Stop when the epoch SSE changes less than this")
        ->capture_default_str();
    train->add_option("--out", targs.out, "Model file")->required();

    auto* cv = app.add_subcommand("cv", "Three-fold cross validation of the full ensemble");
    cv->add_option("--data", data, "Dataset root (one directory per class)")->required();
    cv->add_option("--config", config, "key=value configuration file");
    cv->add_option("--report", report, "Report file")->required();

    std::vector<std::string> models;
    std::size_t top = 1;
    auto* predict = app.add_subcommand("predict", "Classify one image with three trained networks");
    predict->add_option("--models", models, "Three model files")->required()->expected(3);
    predict->add_option("--weights-from", report, "Cross-validation report holding the voting weights")->required();
    predict->add_option("--image", image, "PGM image")->required();
    predict->add_option("--top", top, "Number of ranked classes to print")->check(CLI::PositiveNumber);

    devrec::synthetic::CorpusOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "Render a synthetic glyph corpus");
    synth->add_option("--out", out, "Output directory")->required();
    synth->add_option("--classes", synth_opt.classes, "Number of classes (1-10)")->capture_default_str();
    synth->add_option("--per-class", synth_opt.per_class, "Images per class")->capture_default_str();
    synth->add_option("--seed", synth_opt.seed, "Random seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*extract)
            return run_extract(data, out);
        if (*train)
            return run_train(targs);
        if (*cv)
            return run_cv(data, config, report);
        if (*predict)
            return run_predict(models, report, image, top);
        if (*synth) {
            devrec::synthetic::write_corpus(out, synth_opt);
            return kOk;
        }
    } catch (const devrec::Error& e) {
        return report_error(e, e.code() == devrec::Errc::InvalidArgument ? kUsage : kData);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "devrec: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
