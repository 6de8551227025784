#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maskcombine/error.hpp"

namespace maskcombine {

// ─── Punctuation Classes ─────────────────────────────────────────────────────

// Wire order is fixed: index 0..3 = O, COMMA, PERIOD, QUESTION.
enum class PunctClass : std::uint8_t { O = 0, Comma = 1, Period = 2, Question = 3 };

inline constexpr std::size_t kNumClasses = 4;

inline constexpr std::array<PunctClass, kNumClasses> kAllClasses{
    PunctClass::O, PunctClass::Comma, PunctClass::Period, PunctClass::Question};

// The classes that carry a mark; O is excluded from scoring.
inline constexpr std::array<PunctClass, 3> kMarkClasses{
    PunctClass::Comma, PunctClass::Period, PunctClass::Question};

inline constexpr std::array<std::string_view, kNumClasses> kWireClassOrder{
    "O", "COMMA", "PERIOD", "QUESTION"};

constexpr std::size_t index_of(PunctClass c) { return static_cast<std::size_t>(c); }

inline PunctClass class_from_index(std::size_t index) {
    if (index >= kNumClasses) {
        throw Error(ErrorCategory::Parse, "class index out of range: " + std::to_string(index));
    }
    return kAllClasses[index];
}

constexpr std::string_view wire_name(PunctClass c) { return kWireClassOrder[index_of(c)]; }

// Mark appended after a word carrying this label; '\0' for O.
constexpr char mark_of(PunctClass c) {
    switch (c) {
    case PunctClass::Comma: return ',';
    case PunctClass::Period: return '.';
    case PunctClass::Question: return '?';
    case PunctClass::O: break;
    }
    return '\0';
}

namespace detail {

inline std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

} // namespace detail

// Case-insensitive wire-name lookup.
inline std::optional<PunctClass> parse_class(std::string_view name) {
    const std::string lowered = detail::lowercase(name);
    for (PunctClass c : kAllClasses) {
        if (lowered == detail::lowercase(wire_name(c))) {
            return c;
        }
    }
    return std::nullopt;
}

// ─── Distribution ────────────────────────────────────────────────────────────

// Probability vector over the four classes, always on the simplex.
class Distribution {
public:
    // Inputs whose sum is within this of 1 are accepted and renormalized.
    static constexpr double kSumTolerance = 1e-6;
    static constexpr double kRoundingSlack = 8 * std::numeric_limits<double>::epsilon();

    Distribution() = default;

    static Distribution from_probs(std::span<const double> probs) {
        if (probs.size() != kNumClasses) {
            throw Error(ErrorCategory::Provider,
                        "distribution needs 4 entries, got " + std::to_string(probs.size()));
        }
        std::array<double, kNumClasses> p{};
        double sum = 0.0;
        for (std::size_t i = 0; i < kNumClasses; ++i) {
            if (!std::isfinite(probs[i]) || probs[i] < 0.0) {
                throw Error(ErrorCategory::Provider,
                            "distribution entry " + std::to_string(i) + " is negative or not finite");
            }
            p[i] = probs[i];
            sum += probs[i];
        }
        if (std::abs(sum - 1.0) > kSumTolerance) {
            throw Error(ErrorCategory::Provider,
                        "distribution sums to " + std::to_string(sum) + ", expected 1");
        }
        // Sums within rounding noise of 1 are kept as given.
        if (std::abs(sum - 1.0) > kRoundingSlack) {
            for (double &v : p) {
                v /= sum;
            }
        }
        return Distribution(p);
    }

    static Distribution from_probs(const std::array<double, kNumClasses> &probs) {
        return from_probs(std::span<const double>(probs));
    }

    static Distribution one_hot(PunctClass c) {
        std::array<double, kNumClasses> p{};
        p[index_of(c)] = 1.0;
        return Distribution(p);
    }

    static Distribution uniform() { return Distribution(); }

    double operator[](PunctClass c) const { return probs_[index_of(c)]; }
    double operator[](std::size_t index) const { return probs_[index]; }

    const std::array<double, kNumClasses> &probs() const { return probs_; }

    friend bool operator==(const Distribution &, const Distribution &) = default;

private:
    explicit Distribution(const std::array<double, kNumClasses> &p) : probs_(p) {}

    std::array<double, kNumClasses> probs_{0.25, 0.25, 0.25, 0.25};
};

// ─── Decoding Configuration ──────────────────────────────────────────────────

enum class CombinerKind { Mean, EntropyWeighted, Hamming };

constexpr std::string_view to_string(CombinerKind kind) {
    switch (kind) {
    case CombinerKind::Mean: return "mean";
    case CombinerKind::EntropyWeighted: return "entropy";
    case CombinerKind::Hamming: return "hamming";
    }
    return "mean";
}

inline std::optional<CombinerKind> parse_combiner(std::string_view name) {
    const std::string lowered = detail::lowercase(name);
    if (lowered == "mean") {
        return CombinerKind::Mean;
    }
    if (lowered == "entropy" || lowered == "entropy-weighted" || lowered == "entropyweighted" ||
        lowered == "entropy_weighted") {
        return CombinerKind::EntropyWeighted;
    }
    if (lowered == "hamming") {
        return CombinerKind::Hamming;
    }
    return std::nullopt;
}

// How the transcript start is handled.
//   Waive: the first window's left mask is dropped.
//   Ramp:  windows slide in from before the transcript start and are clipped,
//          so no window ever sees more than m_r tokens past its first
//          unmasked word. Used by the real-time preset.
// The last window's right mask is waived in both modes.
enum class BoundaryMode { Waive, Ramp };

constexpr std::string_view to_string(BoundaryMode mode) {
    return mode == BoundaryMode::Ramp ? "ramp" : "waive";
}

inline std::optional<BoundaryMode> parse_boundary(std::string_view name) {
    const std::string lowered = detail::lowercase(name);
    if (lowered == "waive") {
        return BoundaryMode::Waive;
    }
    if (lowered == "ramp") {
        return BoundaryMode::Ramp;
    }
    return std::nullopt;
}

struct DecodingConfig {
    std::size_t window = 0;     // w
    std::size_t stride = 0;     // s
    std::size_t mask_left = 0;  // m_l
    std::size_t mask_right = 0; // m_r
    CombinerKind combiner = CombinerKind::Mean;
    BoundaryMode boundary = BoundaryMode::Waive;

    // Stride that gives exactly one prediction per word: w - (m_l + m_r).
    std::size_t unmasked_span() const { return window - mask_left - mask_right; }

    void validate() const {
        if (window == 0) {
            throw Error(ErrorCategory::Config, "window size must be positive");
        }
        if (mask_left + mask_right >= window) {
            throw Error(ErrorCategory::Config,
                        "mask-left + mask-right (" + std::to_string(mask_left + mask_right) +
                            ") must be smaller than the window (" + std::to_string(window) + ")");
        }
        if (stride == 0) {
            throw Error(ErrorCategory::Config, "stride must be positive");
        }
        if (stride > unmasked_span()) {
            throw Error(ErrorCategory::Config,
                        "stride " + std::to_string(stride) + " exceeds the unmasked span " +
                            std::to_string(unmasked_span()) + " and would leave words uncovered");
        }
    }

    friend bool operator==(const DecodingConfig &, const DecodingConfig &) = default;
};

// ─── Windows ─────────────────────────────────────────────────────────────────

struct WindowSpec {
    std::size_t start = 0;
    std::size_t len = 0;
    std::size_t mask_left = 0;
    std::size_t mask_right = 0;

    std::size_t unmasked_begin() const { return start + mask_left; }
    std::size_t unmasked_end() const { return start + len - mask_right; }
    bool covers(std::size_t word) const { return word >= unmasked_begin() && word < unmasked_end(); }

    friend bool operator==(const WindowSpec &, const WindowSpec &) = default;
};

struct WindowPrediction {
    WindowSpec spec;
    std::vector<Distribution> dists; // one per window position, masked ones included
};

struct TokenStream {
    std::vector<std::string> tokens;
    std::optional<std::vector<PunctClass>> labels;

    std::size_t size() const { return tokens.size(); }

    void validate() const {
        if (labels && labels->size() != tokens.size()) {
            throw Error(ErrorCategory::Parse, "label count " + std::to_string(labels->size()) +
                                                  " does not match token count " +
                                                  std::to_string(tokens.size()));
        }
    }
};

// One prediction available for a word, with where it sat in its source window.
struct Contribution {
    Distribution dist;
    std::size_t position = 0;   // index within the window
    std::size_t window_len = 0; // length of that window

    friend bool operator==(const Contribution &, const Contribution &) = default;
};

// ─── Stride ──────────────────────────────────────────────────────────────────

// Stride yielding at least `overlap` predictions per interior word:
// floor((w - (m_l + m_r)) / n).
inline std::size_t compute_stride(std::size_t window, std::size_t mask_left, std::size_t mask_right,
                                  std::size_t overlap) {
    if (window == 0) {
        throw Error(ErrorCategory::Config, "window size must be positive");
    }
    if (mask_left + mask_right >= window) {
        throw Error(ErrorCategory::Config,
                    "mask-left + mask-right must be smaller than the window size");
    }
    const std::size_t unmasked = window - mask_left - mask_right;
    if (overlap == 0 || overlap > unmasked) {
        throw Error(ErrorCategory::Config,
                    "overlap n=" + std::to_string(overlap) + " must lie in [1, " +
                        std::to_string(unmasked) + "]");
    }
    return unmasked / overlap;
}

// ─── Window Generation ───────────────────────────────────────────────────────

namespace detail {

inline std::vector<WindowSpec> waive_windows(std::size_t length, const DecodingConfig &config) {
    if (length <= config.window) {
        return {WindowSpec{0, length, 0, 0}};
    }
    std::vector<WindowSpec> windows;
    windows.reserve(length / config.stride + 1);
    for (std::size_t start = 0;; start += config.stride) {
        const std::size_t end = std::min(start + config.window, length);
        const bool first = start == 0;
        const bool last = end == length;
        windows.push_back(WindowSpec{start, end - start, first ? 0 : config.mask_left,
                                     last ? 0 : config.mask_right});
        if (last) {
            break;
        }
    }
    return windows;
}

inline std::vector<WindowSpec> ramp_windows(std::size_t length, const DecodingConfig &config) {
    using Offset = std::int64_t;
    const auto len = static_cast<Offset>(length);
    const auto w = static_cast<Offset>(config.window);
    const auto s = static_cast<Offset>(config.stride);
    const auto ml = static_cast<Offset>(config.mask_left);
    const auto mr = static_cast<Offset>(config.mask_right);

    // First conceptual start c = k*s whose unmasked span [c+m_l, c+w-m_r)
    // still reaches into the transcript: smallest k with k*s > m_r - w.
    const Offset bound = mr - w; // negative
    const Offset first_k = -((-bound + s - 1) / s) + 1; // floor(bound / s) + 1
    std::vector<WindowSpec> windows;
    for (Offset k = first_k;; ++k) {
        const Offset c = k * s;
        const Offset begin = std::max<Offset>(c, 0);
        const bool last = c + w >= len;
        const Offset end = last ? len : c + w;
        const Offset left = std::max<Offset>(c + ml, 0) - begin;
        const Offset right = last ? 0 : mr;
        windows.push_back(WindowSpec{static_cast<std::size_t>(begin), static_cast<std::size_t>(end - begin),
                                     static_cast<std::size_t>(left), static_cast<std::size_t>(right)});
        if (last) {
            break;
        }
    }
    return windows;
}

} // namespace detail

// Windows in ascending start order; the union of their unmasked ranges is
// exactly [0, length).
inline std::vector<WindowSpec> generate_windows(std::size_t length, const DecodingConfig &config) {
    config.validate();
    if (length == 0) {
        throw Error(ErrorCategory::Config, "transcript must contain at least one word");
    }
    return config.boundary == BoundaryMode::Ramp ? detail::ramp_windows(length, config)
                                                 : detail::waive_windows(length, config);
}

// ─── Assembly ────────────────────────────────────────────────────────────────

// Collects, for each word, the distributions of every window in which the
// word is unmasked. Masked positions are dropped.
inline std::vector<std::vector<Contribution>> assemble_per_word(
    std::span<const WindowPrediction> predictions, std::size_t length) {
    std::vector<std::vector<Contribution>> per_word(length);
    for (const WindowPrediction &prediction : predictions) {
        const WindowSpec &spec = prediction.spec;
        if (prediction.dists.size() != spec.len) {
            throw Error(ErrorCategory::Geometry,
                        "window at " + std::to_string(spec.start) + " has " +
                            std::to_string(prediction.dists.size()) + " distributions for " +
                            std::to_string(spec.len) + " positions");
        }
        if (spec.start + spec.len > length || spec.mask_left + spec.mask_right >= spec.len) {
            throw Error(ErrorCategory::Geometry,
                        "window at " + std::to_string(spec.start) + " (len " +
                            std::to_string(spec.len) + ") does not fit a transcript of " +
                            std::to_string(length) + " words");
        }
        for (std::size_t pos = spec.mask_left; pos < spec.len - spec.mask_right; ++pos) {
            per_word[spec.start + pos].push_back(Contribution{prediction.dists[pos], pos, spec.len});
        }
    }
    for (std::size_t word = 0; word < length; ++word) {
        if (per_word[word].empty()) {
            throw Error(ErrorCategory::Coverage,
                        "word " + std::to_string(word) + " received no unmasked prediction");
        }
    }
    return per_word;
}

} // namespace maskcombine
