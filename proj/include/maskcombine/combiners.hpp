#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "maskcombine/core.hpp"

namespace maskcombine {

namespace detail {

inline void require_non_empty(std::size_t count) {
    if (count == 0) {
        throw Error(ErrorCategory::Coverage, "cannot combine an empty set of distributions");
    }
}

// Weights must be positive in sum; they are normalized here.
inline Distribution weighted_sum(std::span<const Distribution> dists, std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    std::array<double, kNumClasses> acc{};
    for (std::size_t i = 0; i < dists.size(); ++i) {
        const double w = weights[i] / total;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            acc[c] += w * dists[i][c];
        }
    }
    return Distribution::from_probs(acc);
}

} // namespace detail

// Shannon entropy in nats.
inline double entropy(const Distribution &dist) {
    double h = 0.0;
    for (double p : dist.probs()) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

inline const double kMaxEntropy = std::log(static_cast<double>(kNumClasses));

// Standard Hamming coefficient for a position inside a window of `len`.
inline double hamming_weight(std::size_t position, std::size_t len) {
    if (len <= 1) {
        return 0.54;
    }
    const double phase = static_cast<double>(position) / static_cast<double>(len - 1);
    return 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * phase);
}

inline Distribution combine_mean(std::span<const Distribution> dists) {
    detail::require_non_empty(dists.size());
    if (dists.size() == 1) {
        return dists.front();
    }
    const std::vector<double> weights(dists.size(), 1.0);
    return detail::weighted_sum(dists, weights);
}

// Confidence-weighted sum: weight_i ∝ ln(4) - H(p_i). Falls back to the mean
// when every input is (numerically) uniform.
inline Distribution combine_entropy_weighted(std::span<const Distribution> dists) {
    detail::require_non_empty(dists.size());
    if (dists.size() == 1) {
        return dists.front();
    }
    std::vector<double> weights;
    weights.reserve(dists.size());
    bool any_confident = false;
    for (const Distribution &d : dists) {
        const double w = std::max(0.0, kMaxEntropy - entropy(d));
        any_confident = any_confident || w >= 1e-12;
        weights.push_back(w);
    }
    if (!any_confident) {
        return combine_mean(dists);
    }
    return detail::weighted_sum(dists, weights);
}

// Position-weighted sum: predictions near a window edge count less.
inline Distribution combine_hamming(std::span<const Contribution> entries) {
    detail::require_non_empty(entries.size());
    if (entries.size() == 1) {
        return entries.front().dist;
    }
    std::vector<Distribution> dists;
    std::vector<double> weights;
    dists.reserve(entries.size());
    weights.reserve(entries.size());
    for (const Contribution &entry : entries) {
        dists.push_back(entry.dist);
        weights.push_back(hamming_weight(entry.position, entry.window_len));
    }
    return detail::weighted_sum(dists, weights);
}

inline Distribution combine(CombinerKind kind, std::span<const Contribution> entries) {
    if (kind == CombinerKind::Hamming) {
        return combine_hamming(entries);
    }
    std::vector<Distribution> dists;
    dists.reserve(entries.size());
    for (const Contribution &entry : entries) {
        dists.push_back(entry.dist);
    }
    return kind == CombinerKind::EntropyWeighted ? combine_entropy_weighted(dists)
                                                 : combine_mean(dists);
}

// Argmax; ties go to the lowest class index, so O wins any tie it is part of.
inline PunctClass decode_label(const Distribution &dist) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
        if (dist[c] > dist[best]) {
            best = c;
        }
    }
    return kAllClasses[best];
}

} // namespace maskcombine
