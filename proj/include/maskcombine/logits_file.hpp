#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maskcombine/core.hpp"
#include "maskcombine/providers.hpp"
#include "maskcombine/wire.hpp"

namespace maskcombine {

// Line-delimited window predictions exchanged with an external exporter.
//
//   {"class_order":["O","COMMA","PERIOD","QUESTION"],"transcript_hash":"…","window_params":{"w":20,"s":5,"m_l":3,"m_r":6}}
//   {"start":0,"tokens":["a","b"],"probs":[[0.9,0.1,0,0],[1,0,0,0]]}
//   …
//
// One header line, then one record per window sorted by start. Numbers are
// written in shortest round-trip form.

struct WindowParams {
    std::size_t window = 0;
    std::size_t stride = 0;
    std::size_t mask_left = 0;
    std::size_t mask_right = 0;

    friend bool operator==(const WindowParams &, const WindowParams &) = default;
};

struct LogitsHeader {
    std::string transcript_hash;
    std::optional<WindowParams> window_params;
};

struct LogitsRecord {
    std::size_t start = 0;
    std::vector<std::string> tokens;
    std::vector<std::array<double, kNumClasses>> probs;
};

struct LogitsFile {
    LogitsHeader header;
    std::vector<LogitsRecord> records;
};

inline void write_logits(std::ostream &out, const LogitsFile &file) {
    out << "{\"class_order\":" << wire::format_class_order()
        << ",\"transcript_hash\":" << wire::quote(file.header.transcript_hash);
    if (const auto &p = file.header.window_params) {
        out << ",\"window_params\":{\"w\":" << p->window << ",\"s\":" << p->stride
            << ",\"m_l\":" << p->mask_left << ",\"m_r\":" << p->mask_right << '}';
    }
    out << "}\n";
    for (const LogitsRecord &record : file.records) {
        out << "{\"start\":" << record.start << ",\"tokens\":" << wire::format_tokens(record.tokens)
            << ",\"probs\":[";
        for (std::size_t i = 0; i < record.probs.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << wire::format_row(record.probs[i]);
        }
        out << "]}\n";
    }
}

inline LogitsFile parse_logits(std::istream &in) {
    LogitsFile file;
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
            file.header.transcript_hash = wire::as_hash(value, line_no);
            if (const auto it = value.find("window_params"); it != value.end() && !it->is_null()) {
                const wire::Json &p = *it;
                if (!p.is_object()) {
                    throw ParseError(line_no, "window_params must be an object");
                }
                file.header.window_params = WindowParams{
                    wire::as_index(wire::require(p, "w", line_no), "w", line_no),
                    wire::as_index(wire::require(p, "s", line_no), "s", line_no),
                    wire::as_index(wire::require(p, "m_l", line_no), "m_l", line_no),
                    wire::as_index(wire::require(p, "m_r", line_no), "m_r", line_no)};
            }
            have_header = true;
            continue;
        }
        LogitsRecord record;
        record.start = wire::as_index(wire::require(value, "start", line_no), "start", line_no);
        record.tokens = wire::as_tokens(wire::require(value, "tokens", line_no), line_no);
        const wire::Json &probs = wire::require(value, "probs", line_no);
        if (!probs.is_array() || probs.size() != record.tokens.size()) {
            throw ParseError(line_no, "probs must hold one row per token");
        }
        record.probs.reserve(probs.size());
        for (const wire::Json &row : probs) {
            record.probs.push_back(wire::as_row(row, line_no));
        }
        if (!file.records.empty() && record.start < file.records.back().start) {
            throw ParseError(line_no, "records must be sorted by start");
        }
        file.records.push_back(std::move(record));
    }
    if (!have_header) {
        throw ParseError(line_no == 0 ? 1 : line_no, "missing header line");
    }
    return file;
}

inline LogitsFile read_logits(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCategory::Io, "cannot open logits file " + path);
    }
    return parse_logits(in);
}

// Serves the windows stored in a LogitsFile, keyed by (start, length).
class FileProvider : public ProbabilityProvider {
public:
    explicit FileProvider(LogitsFile file) : file_(std::move(file)) {
        for (std::size_t i = 0; i < file_.records.size(); ++i) {
            const LogitsRecord &r = file_.records[i];
            max_len_ = std::max(max_len_, r.tokens.size());
            if (!index_.emplace(std::pair{r.start, r.tokens.size()}, i).second) {
                throw Error(ErrorCategory::Parse, "duplicate window (start " + std::to_string(r.start) +
                                                      ", len " + std::to_string(r.tokens.size()) + ")");
            }
        }
    }

    std::vector<Distribution> predict(std::span<const std::string> window_tokens,
                                      std::size_t start) const override {
        const auto it = index_.find(std::pair{start, window_tokens.size()});
        if (it == index_.end()) {
            throw Error(ErrorCategory::Geometry,
                        "no window (start " + std::to_string(start) + ", len " +
                            std::to_string(window_tokens.size()) +
                            ") in logits file; export it with the same window plan");
        }
        const LogitsRecord &record = file_.records[it->second];
        if (!std::equal(record.tokens.begin(), record.tokens.end(), window_tokens.begin(),
                        window_tokens.end())) {
            throw Error(ErrorCategory::Geometry,
                        "tokens of window at " + std::to_string(start) + " differ from the transcript");
        }
        std::vector<Distribution> out;
        out.reserve(record.probs.size());
        for (const auto &row : record.probs) {
            out.push_back(Distribution::from_probs(row));
        }
        return out;
    }

    std::optional<std::size_t> max_window() const override {
        if (file_.header.window_params) {
            return std::max(file_.header.window_params->window, max_len_);
        }
        return max_len_;
    }

    void verify_transcript(std::span<const std::string> tokens) const override {
        const std::string actual = wire::transcript_hash(tokens);
        if (actual != file_.header.transcript_hash) {
            throw Error(ErrorCategory::Geometry, "transcript hash mismatch: file has " +
                                                     file_.header.transcript_hash + ", transcript is " +
                                                     actual);
        }
    }

    const LogitsFile &file() const { return file_; }

private:
    LogitsFile file_;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index_;
    std::size_t max_len_ = 0;
};

inline std::shared_ptr<FileProvider> provider_from_file(const std::string &path) {
    return std::make_shared<FileProvider>(read_logits(path));
}

// Records what `provider` predicts for each window of the plan, in the
// format an external exporter produces.
inline LogitsFile export_logits(std::span<const std::string> tokens, std::span<const WindowSpec> plan,
                                const ProbabilityProvider &provider,
                                std::optional<WindowParams> params = std::nullopt) {
    LogitsFile file;
    file.header.transcript_hash = wire::transcript_hash(tokens);
    file.header.window_params = params;
    for (const WindowSpec &spec : plan) {
        const auto window_tokens = tokens.subspan(spec.start, spec.len);
        LogitsRecord record{spec.start, {window_tokens.begin(), window_tokens.end()}, {}};
        for (const Distribution &d : provider.predict(window_tokens, spec.start)) {
            record.probs.push_back(d.probs());
        }
        file.records.push_back(std::move(record));
    }
    return file;
}

// ─── Window plan ─────────────────────────────────────────────────────────────

// One line per window: start<TAB>len<TAB>mask_left<TAB>mask_right.
inline void write_window_plan(std::ostream &out, std::span<const WindowSpec> plan) {
    for (const WindowSpec &w : plan) {
        out << w.start << '\t' << w.len << '\t' << w.mask_left << '\t' << w.mask_right << '\n';
    }
}

inline std::vector<WindowSpec> parse_window_plan(std::istream &in) {
    std::vector<WindowSpec> plan;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (wire::is_blank(line)) {
            continue;
        }
        std::istringstream fields(line);
        WindowSpec spec;
        std::string extra;
        if (!(fields >> spec.start >> spec.len >> spec.mask_left >> spec.mask_right) || (fields >> extra)) {
            throw ParseError(line_no, "expected start<TAB>len<TAB>mask_left<TAB>mask_right");
        }
        plan.push_back(spec);
    }
    return plan;
}

} // namespace maskcombine
