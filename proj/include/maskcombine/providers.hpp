#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "maskcombine/core.hpp"

namespace maskcombine {

// Source of per-position class distributions for a window of words. All
// implementations speak the wire class order and are deterministic: the same
// (tokens, start) always yields the same matrix. Queries are const and may run
// concurrently.
class ProbabilityProvider {
public:
    virtual ~ProbabilityProvider() = default;

    // Must return exactly window_tokens.size() distributions.
    virtual std::vector<Distribution> predict(std::span<const std::string> window_tokens,
                                              std::size_t start) const = 0;

    // Longest window the provider can serve, if bounded.
    virtual std::optional<std::size_t> max_window() const { return std::nullopt; }

    // Throws if the provider was produced for a different transcript.
    virtual void verify_transcript(std::span<const std::string> /*tokens*/) const {}
};

// ─── Rules ───────────────────────────────────────────────────────────────────

// Maps token suffix markers to classes. Tokens without a marker get O with
// probability `confidence`, the remainder spread evenly over the other classes.
struct RuleSet {
    std::vector<std::pair<std::string, PunctClass>> markers;
    double confidence = 1.0;

    // "·C", "·P", "·Q" for comma, period and question.
    static RuleSet standard(double confidence = 1.0) {
        return RuleSet{{{"·C", PunctClass::Comma},
                        {"·P", PunctClass::Period},
                        {"·Q", PunctClass::Question}},
                       confidence};
    }

    // Line format: "MARKER CLASS" per rule, "confidence C" once, '#' comments.
    static RuleSet parse(std::istream &in) {
        RuleSet rules;
        rules.markers.clear();
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) {
                line.erase(hash);
            }
            std::istringstream fields(line);
            std::string key;
            std::string value;
            if (!(fields >> key)) {
                continue;
            }
            std::string extra;
            if (!(fields >> value) || (fields >> extra)) {
                throw ParseError(line_no, "expected two fields, got '" + line + "'");
            }
            if (key == "confidence") {
                double c = 0.0;
                try {
                    std::size_t used = 0;
                    c = std::stod(value, &used);
                    if (used != value.size()) {
                        throw std::invalid_argument(value);
                    }
                } catch (const std::exception &) {
                    throw ParseError(line_no, "confidence is not a number: " + value);
                }
                if (!(c >= 0.0 && c <= 1.0)) {
                    throw ParseError(line_no, "confidence must lie in [0, 1]");
                }
                rules.confidence = c;
                continue;
            }
            const auto cls = parse_class(value);
            if (!cls) {
                throw ParseError(line_no, "unknown class '" + value + "'");
            }
            rules.markers.emplace_back(key, *cls);
        }
        return rules;
    }

    static RuleSet load(const std::string &path) {
        std::ifstream in(path);
        if (!in) {
            throw Error(ErrorCategory::Io, "cannot open rules file " + path);
        }
        return parse(in);
    }

    // Class of the longest marker the token ends with.
    std::optional<PunctClass> match(std::string_view token) const {
        std::optional<PunctClass> best;
        std::size_t best_len = 0;
        for (const auto &[marker, cls] : markers) {
            if (marker.size() >= best_len && token.size() >= marker.size() &&
                token.substr(token.size() - marker.size()) == marker) {
                best = cls;
                best_len = marker.size();
            }
        }
        return best;
    }

    Distribution distribution_for(std::string_view token) const {
        if (const auto cls = match(token)) {
            return Distribution::one_hot(*cls);
        }
        const double rest = (1.0 - confidence) / static_cast<double>(kNumClasses - 1);
        return Distribution::from_probs(std::array<double, kNumClasses>{confidence, rest, rest, rest});
    }
};

// Position-independent oracle provider driven by a RuleSet.
class RuleProvider : public ProbabilityProvider {
public:
    explicit RuleProvider(RuleSet rules) : rules_(std::move(rules)) {}

    std::vector<Distribution> predict(std::span<const std::string> window_tokens,
                                      std::size_t /*start*/) const override {
        std::vector<Distribution> out;
        out.reserve(window_tokens.size());
        for (const std::string &token : window_tokens) {
            out.push_back(rules_.distribution_for(token));
        }
        return out;
    }

    const RuleSet &rules() const { return rules_; }

private:
    RuleSet rules_;
};

inline std::shared_ptr<RuleProvider> rule_provider(RuleSet rules) {
    return std::make_shared<RuleProvider>(std::move(rules));
}

// ─── Edge noise ──────────────────────────────────────────────────────────────

// Degrades predictions near window edges. A position at distance d from the
// nearer edge of a window of length L is mixed with a random distribution at
// weight edge_noise * max(0, 1 - d / h), where h = (L-1)/2 is the distance
// from either edge to the window center. The random distribution is drawn
// uniformly from the simplex, seeded by (seed, window start, position), so
// overlapping windows see independent noise while repeated queries stay
// identical.
class NoisyBoundaryProvider : public ProbabilityProvider {
public:
    NoisyBoundaryProvider(std::shared_ptr<const ProbabilityProvider> base, double edge_noise,
                          std::uint64_t seed = 0)
        : base_(std::move(base)), edge_noise_(edge_noise), seed_(seed) {
        if (!base_) {
            throw Error(ErrorCategory::Config, "noisy provider needs a base provider");
        }
        if (!(edge_noise >= 0.0 && edge_noise <= 1.0)) {
            throw Error(ErrorCategory::Config, "edge noise must lie in [0, 1]");
        }
    }

    std::vector<Distribution> predict(std::span<const std::string> window_tokens,
                                      std::size_t start) const override {
        std::vector<Distribution> out = base_->predict(window_tokens, start);
        const std::size_t len = out.size();
        for (std::size_t pos = 0; pos < len; ++pos) {
            const double weight = mix_weight(pos, len);
            if (weight <= 0.0) {
                continue;
            }
            const Distribution noise = noise_draw(seed_, start, pos);
            std::array<double, kNumClasses> mixed{};
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                mixed[c] = (1.0 - weight) * out[pos][c] + weight * noise[c];
            }
            out[pos] = Distribution::from_probs(mixed);
        }
        return out;
    }

    std::optional<std::size_t> max_window() const override { return base_->max_window(); }

    void verify_transcript(std::span<const std::string> tokens) const override {
        base_->verify_transcript(tokens);
    }

    double mix_weight(std::size_t pos, std::size_t len) const {
        if (len <= 1) {
            return edge_noise_;
        }
        const double distance = static_cast<double>(std::min(pos, len - 1 - pos));
        const double half = static_cast<double>(len - 1) / 2.0;
        return edge_noise_ * std::max(0.0, 1.0 - distance / half);
    }

    static Distribution noise_draw(std::uint64_t seed, std::size_t start, std::size_t pos) {
        const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
        const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
        std::seed_seq seq{lo(seed), hi(seed), lo(start), hi(start), lo(pos), hi(pos)};
        std::mt19937_64 engine(seq);
        // Flat Dirichlet via normalized unit exponentials; u in (0, 1].
        std::array<double, kNumClasses> draw{};
        double total = 0.0;
        for (double &v : draw) {
            const double u = static_cast<double>((engine() >> 11) + 1) * 0x1.0p-53;
            v = -std::log(u);
            total += v;
        }
        for (double &v : draw) {
            v /= total;
        }
        return Distribution::from_probs(draw);
    }

    double edge_noise() const { return edge_noise_; }

private:
    std::shared_ptr<const ProbabilityProvider> base_;
    double edge_noise_;
    std::uint64_t seed_;
};

inline std::shared_ptr<NoisyBoundaryProvider> noisy_boundary_provider(
    std::shared_ptr<const ProbabilityProvider> base, double edge_noise, std::uint64_t seed = 0) {
    return std::make_shared<NoisyBoundaryProvider>(std::move(base), edge_noise, seed);
}

} // namespace maskcombine
