#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "maskcombine/core.hpp"
#include "maskcombine/providers.hpp"

namespace maskcombine::testing {

inline std::size_t uniform_index(std::mt19937_64 &rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

struct RandomCase {
    std::size_t window = 0;
    std::size_t mask_left = 0;
    std::size_t mask_right = 0;
    std::size_t overlap = 1;
    std::size_t length = 0;
};

// Valid (w, m_l, m_r, n) with a transcript length in [1, max_length].
inline RandomCase random_case(std::mt19937_64 &rng, std::size_t max_window, std::size_t max_length) {
    RandomCase c;
    c.window = uniform_index(rng, 1, max_window);
    const std::size_t masks = uniform_index(rng, 0, c.window - 1);
    c.mask_left = uniform_index(rng, 0, masks);
    c.mask_right = masks - c.mask_left;
    const std::size_t unmasked = c.window - masks;
    c.overlap = uniform_index(rng, 1, std::min<std::size_t>(unmasked, 8));
    c.length = uniform_index(rng, 1, max_length);
    return c;
}

// For every word, every window index whose unmasked range contains it,
// found by testing each (word, window) pair directly.
inline std::vector<std::vector<std::size_t>> brute_force_cover(std::size_t length,
                                                               const std::vector<WindowSpec> &windows) {
    std::vector<std::vector<std::size_t>> cover(length);
    for (std::size_t word = 0; word < length; ++word) {
        for (std::size_t k = 0; k < windows.size(); ++k) {
            const WindowSpec &w = windows[k];
            const std::size_t lo = w.start + w.mask_left;
            const std::size_t hi = w.start + w.len - w.mask_right;
            if (lo <= word && word < hi) {
                cover[word].push_back(k);
            }
        }
    }
    return cover;
}

// Synthetic transcript: word i is "w<i>" plus the standard marker of its
// label, so RuleSet::standard() recovers the labels exactly.
inline TokenStream synthetic_stream(std::size_t length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    TokenStream stream;
    std::vector<PunctClass> labels;
    for (std::size_t i = 0; i < length; ++i) {
        const std::size_t draw = rng() % 100;
        PunctClass label = PunctClass::O;
        std::string marker;
        if (draw < 10) {
            label = PunctClass::Comma;
            marker = "·C";
        } else if (draw < 17) {
            label = PunctClass::Period;
            marker = "·P";
        } else if (draw < 20) {
            label = PunctClass::Question;
            marker = "·Q";
        }
        stream.tokens.push_back("w" + std::to_string(rng() % 5000) + marker);
        labels.push_back(label);
    }
    stream.labels = std::move(labels);
    return stream;
}

// Context-dependent provider: a word's distribution depends on every token of
// the window it is served in. Used to check what a window can see.
class WindowContextProvider : public ProbabilityProvider {
public:
    std::vector<Distribution> predict(std::span<const std::string> window_tokens,
                                      std::size_t start) const override {
        std::uint64_t h = 1469598103934665603ULL ^ start;
        for (const std::string &t : window_tokens) {
            for (unsigned char ch : t) {
                h = (h ^ ch) * 1099511628211ULL;
            }
            h = (h ^ 0x20) * 1099511628211ULL;
        }
        std::vector<Distribution> out;
        for (std::size_t pos = 0; pos < window_tokens.size(); ++pos) {
            const std::uint64_t x = h ^ (pos * 0x9E3779B97F4A7C15ULL);
            out.push_back(Distribution::one_hot(kAllClasses[(x >> 17) % kNumClasses]));
        }
        return out;
    }
};

} // namespace maskcombine::testing
