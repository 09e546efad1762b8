#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "devrec/error.hpp"
#include "devrec/mlp.hpp"

namespace devrec {

inline constexpr std::size_t kClassifierCount = 3;

/// Voting weights proportional to each classifier's measured accuracy.
struct EnsembleWeights {
    std::array<double, kClassifierCount> omega{};
    std::array<double, kClassifierCount> accuracy{};
};

inline EnsembleWeights derive_weights(const std::array<double, kClassifierCount>& accuracy) {
    double sum = 0;
    for (double d : accuracy) {
        if (!(d >= 0))
            throw Error(Errc::InvalidArgument, "accuracies must be non-negative");
        sum += d;
    }
    if (!(sum > 0))
        throw Error(Errc::AllZeroAccuracies, "at least one classifier must have non-zero accuracy");
    EnsembleWeights w;
    w.accuracy = accuracy;
    for (std::size_t k = 0; k < kClassifierCount; ++k)
        w.omega[k] = accuracy[k] / sum;
    return w;
}

struct CombinedDecision {
    std::vector<double> fused;
    std::size_t winner = 0;
    /// All classes by fused score, descending; equal scores keep index order.
    std::vector<std::size_t> ranking;
};

inline std::vector<std::size_t> rank_scores(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

using ScoreTriple = std::array<ClassScores, kClassifierCount>;

inline CombinedDecision combine(const ScoreTriple& scores, const EnsembleWeights& w) {
    const std::size_t m = scores[0].size();
    for (const auto& s : scores)
        if (s.size() != m)
            throw Error(Errc::LengthMismatch, "score vectors differ in length");
    if (m == 0)
        throw Error(Errc::LengthMismatch, "empty score vectors");

    CombinedDecision d;
    d.fused.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < kClassifierCount; ++k)
            d.fused[i] += w.omega[k] * scores[k][i];
    d.ranking = rank_scores(d.fused);
    d.winner = d.ranking.front();
    return d;
}

inline std::vector<std::size_t> top_k(const CombinedDecision& dec, std::size_t k) {
    if (k < 1 || k > dec.ranking.size())
        throw Error(Errc::BadK, "k must lie in [1, class count]");
    return {dec.ranking.begin(), dec.ranking.begin() + static_cast<std::ptrdiff_t>(k)};
}

inline bool in_top_k(const CombinedDecision& dec, std::size_t label, std::size_t k) {
    const auto top = top_k(dec, k);
    return std::find(top.begin(), top.end(), label) != top.end();
}

/// True when at least one classifier's own top choice is `label`.
inline bool union_top1_hit(const ScoreTriple& scores, std::size_t label) {
    const std::size_t m = scores[0].size();
    for (const auto& s : scores)
        if (s.size() != m)
            throw Error(Errc::LengthMismatch, "score vectors differ in length");
    return std::any_of(scores.begin(), scores.end(),
                       [&](const ClassScores& s) { return argmax(s) == label; });
}

} // namespace devrec
