#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maskcombine/combiners.hpp"
#include "maskcombine/core.hpp"
#include "maskcombine/providers.hpp"
#include "maskcombine/wire.hpp"

namespace maskcombine {

inline constexpr std::string_view kPunctSentinel = "[PUNCT]";

// Classifier input for one word: the sentinel sits right after the word, with
// up to `lookahead` words of right context after it.
struct ClassificationInstance {
    std::size_t word_index = 0;
    std::vector<std::string> tokens;
    std::size_t punct_index = 0;
    std::size_t lookahead = 0;
    std::optional<PunctClass> target;

    // Words actually present after the sentinel.
    std::size_t right_context() const { return tokens.size() - punct_index - 1; }

    friend bool operator==(const ClassificationInstance &, const ClassificationInstance &) = default;
};

// Takes words [0, word_index + lookahead] (clamped to the transcript), inserts
// the sentinel after `word_index`, then drops words from the left until at
// most `window` tokens remain.
inline ClassificationInstance build_instance(std::span<const std::string> tokens, std::size_t word_index,
                                             std::size_t lookahead, std::size_t window) {
    if (word_index >= tokens.size()) {
        throw Error(ErrorCategory::Config, "word index " + std::to_string(word_index) +
                                               " outside a transcript of " +
                                               std::to_string(tokens.size()) + " words");
    }
    const std::size_t right = std::min(lookahead, tokens.size() - 1 - word_index);
    // The word, the sentinel and its right context must all survive truncation.
    if (window < 2 || right + 2 > window) {
        throw Error(ErrorCategory::Config,
                    "window " + std::to_string(window) + " cannot hold the word, the sentinel and " +
                        std::to_string(right) + " lookahead tokens");
    }
    const std::size_t end = word_index + right + 1; // one past the last word kept
    const std::size_t kept_words = std::min(end, window - 1);
    const std::size_t first = end - kept_words;

    ClassificationInstance instance;
    instance.word_index = word_index;
    instance.lookahead = lookahead;
    instance.tokens.reserve(kept_words + 1);
    for (std::size_t i = first; i <= word_index; ++i) {
        instance.tokens.push_back(tokens[i]);
    }
    instance.punct_index = instance.tokens.size();
    instance.tokens.emplace_back(kPunctSentinel);
    for (std::size_t i = word_index + 1; i < end; ++i) {
        instance.tokens.push_back(tokens[i]);
    }
    return instance;
}

// One instance per word, in order, with reference labels attached when present.
inline std::vector<ClassificationInstance> stream_instances(const TokenStream &stream, std::size_t lookahead,
                                                            std::size_t window) {
    stream.validate();
    std::vector<ClassificationInstance> out;
    out.reserve(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        out.push_back(build_instance(stream.tokens, i, lookahead, window));
        if (stream.labels) {
            out.back().target = (*stream.labels)[i];
        }
    }
    return out;
}

// ─── Sentence-level providers ────────────────────────────────────────────────

// Maps a classification instance to the distribution at its sentinel.
class SentenceProvider {
public:
    virtual ~SentenceProvider() = default;
    virtual Distribution classify(const ClassificationInstance &instance) const = 0;
    virtual void verify_transcript(std::span<const std::string> /*tokens*/) const {}
};

// Applies a RuleSet to the word left of the sentinel.
class RuleSentenceProvider : public SentenceProvider {
public:
    explicit RuleSentenceProvider(RuleSet rules) : rules_(std::move(rules)) {}

    Distribution classify(const ClassificationInstance &instance) const override {
        if (instance.punct_index == 0) {
            throw Error(ErrorCategory::Provider, "sentinel has no word to its left");
        }
        return rules_.distribution_for(instance.tokens[instance.punct_index - 1]);
    }

private:
    RuleSet rules_;
};

// Classification results written by an external exporter:
//
//   {"class_order":[…],"transcript_hash":"…","lookahead":2,"window":30}
//   {"word_index":0,"probs":[0.9,0.05,0.05,0]}
//
// Records may also repeat "tokens"/"punct_index" from the instance they
// answer; when present they are checked against the rebuilt instance.
struct ClassificationRecord {
    std::size_t word_index = 0;
    std::array<double, kNumClasses> probs{};
    std::optional<std::vector<std::string>> tokens;
    std::optional<std::size_t> punct_index;
};

struct ClassificationFile {
    std::string transcript_hash;
    std::optional<std::size_t> lookahead;
    std::optional<std::size_t> window;
    std::vector<ClassificationRecord> records;
};

inline void write_classification(std::ostream &out, const ClassificationFile &file) {
    out << "{\"class_order\":" << wire::format_class_order()
        << ",\"transcript_hash\":" << wire::quote(file.transcript_hash);
    if (file.lookahead) {
        out << ",\"lookahead\":" << *file.lookahead;
    }
    if (file.window) {
        out << ",\"window\":" << *file.window;
    }
    out << "}\n";
    for (const ClassificationRecord &r : file.records) {
        out << "{\"word_index\":" << r.word_index;
        if (r.tokens) {
            out << ",\"tokens\":" << wire::format_tokens(*r.tokens);
        }
        if (r.punct_index) {
            out << ",\"punct_index\":" << *r.punct_index;
        }
        out << ",\"probs\":" << wire::format_row(r.probs) << "}\n";
    }
}

inline ClassificationFile parse_classification(std::istream &in) {
    ClassificationFile file;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (wire::is_blank(line)) {
            continue;
        }
        const wire::Json value = wire::parse_line(line, line_no);
        if (!have_header) {
            wire::check_class_order(value, line_no);
            file.transcript_hash = wire::as_hash(value, line_no);
            if (const auto it = value.find("lookahead"); it != value.end()) {
                file.lookahead = wire::as_index(*it, "lookahead", line_no);
            }
            if (const auto it = value.find("window"); it != value.end()) {
                file.window = wire::as_index(*it, "window", line_no);
            }
            have_header = true;
            continue;
        }
        ClassificationRecord record;
        record.word_index = wire::as_index(wire::require(value, "word_index", line_no), "word_index", line_no);
        record.probs = wire::as_row(wire::require(value, "probs", line_no), line_no);
        if (const auto it = value.find("tokens"); it != value.end()) {
            record.tokens = wire::as_tokens(*it, line_no);
        }
        if (const auto it = value.find("punct_index"); it != value.end()) {
            record.punct_index = wire::as_index(*it, "punct_index", line_no);
        }
        file.records.push_back(std::move(record));
    }
    if (!have_header) {
        throw ParseError(line_no == 0 ? 1 : line_no, "missing header line");
    }
    return file;
}

class ClassificationFileProvider : public SentenceProvider {
public:
    explicit ClassificationFileProvider(ClassificationFile file) : file_(std::move(file)) {
        for (std::size_t i = 0; i < file_.records.size(); ++i) {
            if (!index_.emplace(file_.records[i].word_index, i).second) {
                throw Error(ErrorCategory::Parse, "duplicate record for word " +
                                                      std::to_string(file_.records[i].word_index));
            }
        }
    }

    Distribution classify(const ClassificationInstance &instance) const override {
        if (file_.lookahead && *file_.lookahead != instance.lookahead) {
            throw Error(ErrorCategory::Geometry, "file was exported for lookahead " +
                                                     std::to_string(*file_.lookahead) + ", decoding uses " +
                                                     std::to_string(instance.lookahead));
        }
        const auto it = index_.find(instance.word_index);
        if (it == index_.end()) {
            throw Error(ErrorCategory::Geometry, "no classification record for word " +
                                                     std::to_string(instance.word_index));
        }
        const ClassificationRecord &record = file_.records[it->second];
        if ((record.tokens && *record.tokens != instance.tokens) ||
            (record.punct_index && *record.punct_index != instance.punct_index)) {
            throw Error(ErrorCategory::Geometry, "record for word " + std::to_string(instance.word_index) +
                                                     " was built from a different instance");
        }
        return Distribution::from_probs(record.probs);
    }

    void verify_transcript(std::span<const std::string> tokens) const override {
        const std::string actual = wire::transcript_hash(tokens);
        if (actual != file_.transcript_hash) {
            throw Error(ErrorCategory::Geometry, "transcript hash mismatch: file has " + file_.transcript_hash +
                                                     ", transcript is " + actual);
        }
    }

    std::optional<std::size_t> window() const { return file_.window; }

private:
    ClassificationFile file_;
    std::map<std::size_t, std::size_t> index_;
};

inline std::shared_ptr<ClassificationFileProvider> classification_provider_from_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCategory::Io, "cannot open classification file " + path);
    }
    return std::make_shared<ClassificationFileProvider>(parse_classification(in));
}

// Instance records handed to the exporter:
//   {"word_index":3,"tokens":[…],"punct_index":4,"target":"PERIOD"}
inline void write_instances(std::ostream &out, std::span<const ClassificationInstance> instances) {
    for (const ClassificationInstance &inst : instances) {
        out << "{\"word_index\":" << inst.word_index << ",\"tokens\":" << wire::format_tokens(inst.tokens)
            << ",\"punct_index\":" << inst.punct_index;
        if (inst.target) {
            out << ",\"target\":" << wire::quote(wire_name(*inst.target));
        }
        out << "}\n";
    }
}

// Labels each word from its own classification instance.
inline std::vector<PunctClass> decode_classification(const SentenceProvider &provider,
                                                     std::span<const std::string> tokens,
                                                     std::size_t lookahead, std::size_t window) {
    std::vector<PunctClass> labels;
    if (tokens.empty()) {
        return labels;
    }
    provider.verify_transcript(tokens);
    labels.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const ClassificationInstance instance = build_instance(tokens, i, lookahead, window);
        try {
            labels.push_back(decode_label(provider.classify(instance)));
        } catch (const Error &e) {
            throw Error(e.category(), "word " + std::to_string(i) + ": " + e.what());
        }
    }
    return labels;
}

} // namespace maskcombine
