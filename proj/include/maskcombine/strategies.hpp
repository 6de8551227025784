#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "maskcombine/core.hpp"

namespace maskcombine {

// A decoding configuration together with the overlap count it was built for.
struct ResolvedStrategy {
    DecodingConfig config;
    std::size_t overlap = 1; // n

    friend bool operator==(const ResolvedStrategy &, const ResolvedStrategy &) = default;
};

// Window and masks of the unmasked/masked reference setups.
inline constexpr std::size_t kReferenceWindow = 120;
inline constexpr std::size_t kReferenceMaskLeft = 30;
inline constexpr std::size_t kReferenceMaskRight = 15;

// Classification window picked by the window/stride sweep.
inline constexpr std::size_t kRealtimeWindow = 30;

// Masked or unmasked windows with n overlapping predictions per word.
inline ResolvedStrategy build_custom(std::size_t window, std::size_t mask_left, std::size_t mask_right,
                                     std::size_t overlap, CombinerKind combiner = CombinerKind::Mean) {
    const std::size_t stride = compute_stride(window, mask_left, mask_right, overlap);
    ResolvedStrategy out{DecodingConfig{window, stride, mask_left, mask_right, combiner,
                                        BoundaryMode::Waive},
                         overlap};
    out.config.validate();
    return out;
}

// Explicit stride, e.g. to replay a published run verbatim. n is the
// guaranteed overlap floor((w - m_l - m_r) / s).
inline ResolvedStrategy custom_with_stride(std::size_t window, std::size_t stride, std::size_t mask_left,
                                           std::size_t mask_right,
                                           CombinerKind combiner = CombinerKind::Mean) {
    DecodingConfig config{window, stride, mask_left, mask_right, combiner, BoundaryMode::Waive};
    config.validate();
    return ResolvedStrategy{config, config.unmasked_span() / stride};
}

// Double-overlap sliding windows: masked edges, no overlap between the
// unmasked spans of consecutive windows.
inline ResolvedStrategy preset_double_overlap(std::size_t window, std::size_t mask_left,
                                              std::size_t mask_right,
                                              CombinerKind combiner = CombinerKind::Mean) {
    return build_custom(window, mask_left, mask_right, 1, combiner);
}

// Overlapped-chunk split and merge: the chunk boundary sits min_words_cut
// words before the end of the overlap.
inline ResolvedStrategy preset_overlapped_chunk(std::size_t stride, std::size_t overlap_size,
                                                std::size_t min_words_cut, std::size_t window,
                                                CombinerKind combiner = CombinerKind::Mean) {
    if (min_words_cut > overlap_size) {
        throw Error(ErrorCategory::Config, "min_words_cut (" + std::to_string(min_words_cut) +
                                               ") exceeds overlap_size (" +
                                               std::to_string(overlap_size) + ")");
    }
    if (overlap_size >= window) {
        throw Error(ErrorCategory::Config, "overlap_size must be smaller than the window");
    }
    DecodingConfig config{window, stride, overlap_size - min_words_cut, min_words_cut, combiner,
                          BoundaryMode::Waive};
    config.validate();
    return ResolvedStrategy{config, 1};
}

// Real-time decoding with `lookahead` words of right context: every window
// finalizes exactly one word, the one `lookahead` positions before its end.
inline ResolvedStrategy preset_realtime(std::size_t window, std::size_t lookahead,
                                        CombinerKind combiner = CombinerKind::Mean) {
    if (lookahead >= window) {
        throw Error(ErrorCategory::Config, "lookahead " + std::to_string(lookahead) +
                                               " must be smaller than the window " +
                                               std::to_string(window));
    }
    DecodingConfig config{window, 1, window - lookahead - 1, lookahead, combiner, BoundaryMode::Ramp};
    config.validate();
    return ResolvedStrategy{config, 1};
}

inline ResolvedStrategy preset_unmasked(std::size_t overlap = 1, CombinerKind combiner = CombinerKind::Mean) {
    return build_custom(kReferenceWindow, 0, 0, overlap, combiner);
}

inline ResolvedStrategy preset_masked(std::size_t overlap = 1, CombinerKind combiner = CombinerKind::Mean) {
    return build_custom(kReferenceWindow, kReferenceMaskLeft, kReferenceMaskRight, overlap, combiner);
}

// ─── Named presets ───────────────────────────────────────────────────────────

namespace preset {

struct Unmasked {
    std::size_t overlap = 1;
};
struct Masked {
    std::size_t overlap = 1;
};
struct DoubleOverlap {
    std::size_t window = kReferenceWindow;
    std::size_t mask_left = kReferenceMaskLeft;
    std::size_t mask_right = kReferenceMaskRight;
};
struct OverlappedChunk {
    std::size_t window = 0;
    std::size_t stride = 0;
    std::size_t overlap_size = 0;
    std::size_t min_words_cut = 0;
};
struct RealTime {
    std::size_t window = kRealtimeWindow;
    std::size_t lookahead = 0;
};
struct Custom {
    DecodingConfig config;
    std::size_t overlap = 1;
};

} // namespace preset

using StrategyPreset = std::variant<preset::Unmasked, preset::Masked, preset::DoubleOverlap,
                                    preset::OverlappedChunk, preset::RealTime, preset::Custom>;

// Stable names used on the command line.
inline std::string_view preset_name(const StrategyPreset &p) {
    static constexpr std::string_view kNames[] = {"unmasked",         "masked",   "double-overlap",
                                                  "overlapped-chunk", "realtime", "custom"};
    return kNames[p.index()];
}

inline bool is_preset_name(std::string_view name) {
    return name == "unmasked" || name == "masked" || name == "double-overlap" ||
           name == "overlapped-chunk" || name == "realtime" || name == "custom";
}

inline ResolvedStrategy resolve(const StrategyPreset &p, CombinerKind combiner = CombinerKind::Mean) {
    struct Visitor {
        CombinerKind combiner;
        ResolvedStrategy operator()(const preset::Unmasked &u) const {
            return preset_unmasked(u.overlap, combiner);
        }
        ResolvedStrategy operator()(const preset::Masked &m) const {
            return preset_masked(m.overlap, combiner);
        }
        ResolvedStrategy operator()(const preset::DoubleOverlap &d) const {
            return preset_double_overlap(d.window, d.mask_left, d.mask_right, combiner);
        }
        ResolvedStrategy operator()(const preset::OverlappedChunk &o) const {
            return preset_overlapped_chunk(o.stride, o.overlap_size, o.min_words_cut, o.window,
                                           combiner);
        }
        ResolvedStrategy operator()(const preset::RealTime &r) const {
            return preset_realtime(r.window, r.lookahead, combiner);
        }
        ResolvedStrategy operator()(const preset::Custom &c) const {
            DecodingConfig config = c.config;
            config.combiner = combiner;
            config.validate();
            if (c.overlap == 0) {
                throw Error(ErrorCategory::Config, "overlap n must be at least 1");
            }
            return ResolvedStrategy{config, c.overlap};
        }
    };
    return std::visit(Visitor{combiner}, p);
}

// ─── Sweep grid ──────────────────────────────────────────────────────────────

struct SweepRun {
    std::string id;
    std::size_t window = 0;
    std::size_t stride = 0;
    std::vector<std::size_t> lookaheads; // F1 is averaged over these
};

// Lookaheads the window/stride comparison averages over.
inline std::vector<std::size_t> default_sweep_lookaheads() { return {0, 1, 2, 3, 4}; }

// Cartesian product of windows and strides, in grid order (window-major).
inline std::vector<SweepRun> sweep_grid(std::span<const std::size_t> windows,
                                        std::span<const std::size_t> strides,
                                        std::span<const std::size_t> lookaheads) {
    if (windows.empty() || strides.empty() || lookaheads.empty()) {
        throw Error(ErrorCategory::Config, "sweep grid needs at least one window, stride and lookahead");
    }
    std::vector<SweepRun> runs;
    runs.reserve(windows.size() * strides.size());
    for (std::size_t w : windows) {
        for (std::size_t s : strides) {
            if (w == 0 || s == 0) {
                throw Error(ErrorCategory::Config, "sweep windows and strides must be positive");
            }
            runs.push_back(SweepRun{"w" + std::to_string(w) + "_s" + std::to_string(s), w, s,
                                    std::vector<std::size_t>(lookaheads.begin(), lookaheads.end())});
        }
    }
    return runs;
}

} // namespace maskcombine
