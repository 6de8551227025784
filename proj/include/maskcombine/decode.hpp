#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "maskcombine/combiners.hpp"
#include "maskcombine/core.hpp"
#include "maskcombine/providers.hpp"

namespace maskcombine {

struct TaggingResult {
    std::vector<WindowSpec> windows;
    std::vector<Distribution> combined; // one per word
    std::vector<PunctClass> labels;
};

// Mask-combine decoding: slide the configured windows over the transcript,
// keep each window's unmasked predictions, fuse the predictions available at
// every word and take the argmax.
inline TaggingResult decode_tagging(std::span<const std::string> tokens, const ProbabilityProvider &provider,
                                    const DecodingConfig &config) {
    config.validate();
    TaggingResult result;
    if (tokens.empty()) {
        return result;
    }
    if (const auto max = provider.max_window(); max && *max < std::min(config.window, tokens.size())) {
        throw Error(ErrorCategory::Geometry, "provider serves windows up to " + std::to_string(*max) +
                                                 " words, config asks for " + std::to_string(config.window));
    }
    provider.verify_transcript(tokens);

    result.windows = generate_windows(tokens.size(), config);
    std::vector<WindowPrediction> predictions;
    predictions.reserve(result.windows.size());
    for (const WindowSpec &spec : result.windows) {
        std::vector<Distribution> dists = provider.predict(tokens.subspan(spec.start, spec.len), spec.start);
        if (dists.size() != spec.len) {
            throw Error(ErrorCategory::Provider, "provider returned " + std::to_string(dists.size()) +
                                                     " distributions for a window of " +
                                                     std::to_string(spec.len));
        }
        predictions.push_back(WindowPrediction{spec, std::move(dists)});
    }

    const auto per_word = assemble_per_word(predictions, tokens.size());
    result.combined.reserve(tokens.size());
    result.labels.reserve(tokens.size());
    for (const auto &entries : per_word) {
        result.combined.push_back(combine(config.combiner, entries));
        result.labels.push_back(decode_label(result.combined.back()));
    }
    return result;
}

// ─── Text ────────────────────────────────────────────────────────────────────

inline std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) {
            ++j;
        }
        if (j > i) {
            words.emplace_back(text.substr(i, j - i));
        }
        i = j;
    }
    return words;
}

// Words joined by single spaces, each followed by its label's mark.
inline std::string render_punctuated(std::span<const std::string> tokens, std::span<const PunctClass> labels) {
    if (tokens.size() != labels.size()) {
        throw Error(ErrorCategory::Config, "cannot render " + std::to_string(labels.size()) + " labels over " +
                                               std::to_string(tokens.size()) + " words");
    }
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += tokens[i];
        if (const char mark = mark_of(labels[i])) {
            out += mark;
        }
    }
    return out;
}

// Inverse of render_punctuated: a trailing ',', '.' or '?' becomes the label.
inline TokenStream strip_punctuation(std::string_view text) {
    TokenStream stream;
    std::vector<PunctClass> labels;
    for (std::string word : split_words(text)) {
        PunctClass label = PunctClass::O;
        if (word.size() > 1) {
            for (PunctClass c : kMarkClasses) {
                if (word.back() == mark_of(c)) {
                    label = c;
                    word.pop_back();
                    break;
                }
            }
        }
        stream.tokens.push_back(std::move(word));
        labels.push_back(label);
    }
    stream.labels = std::move(labels);
    return stream;
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCategory::Io, "cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::vector<std::string> read_transcript(const std::string &path) {
    return split_words(read_text_file(path));
}

// One wire class name per line; blank lines are skipped.
inline std::vector<PunctClass> parse_labels(std::istream &in) {
    std::vector<PunctClass> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto words = split_words(line);
        if (words.empty()) {
            continue;
        }
        const auto cls = words.size() == 1 ? parse_class(words.front()) : std::nullopt;
        if (!cls) {
            throw ParseError(line_no, "expected one of O, COMMA, PERIOD, QUESTION, got '" + line + "'");
        }
        labels.push_back(*cls);
    }
    return labels;
}

inline std::vector<PunctClass> read_labels(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCategory::Io, "cannot open label file " + path);
    }
    return parse_labels(in);
}

inline void write_labels(std::ostream &out, std::span<const PunctClass> labels) {
    for (PunctClass c : labels) {
        out << wire_name(c) << '\n';
    }
}

} // namespace maskcombine
