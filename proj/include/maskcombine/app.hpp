#pragma once

// Run layer behind the command-line tool: flat key=value settings, run
// manifests, and the decode / emit / eval / sweep runners. Everything here is
// deterministic; a manifest fully determines the bytes a run produces.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maskcombine/classify.hpp"
#include "maskcombine/core.hpp"
#include "maskcombine/decode.hpp"
#include "maskcombine/eval.hpp"
#include "maskcombine/logits_file.hpp"
#include "maskcombine/providers.hpp"
#include "maskcombine/strategies.hpp"

namespace maskcombine {

inline constexpr std::string_view kEngineVersion = "0.1.0";

// ─── Settings ────────────────────────────────────────────────────────────────

// Keys accepted in config files and manifests; each matches a long flag.
inline const std::vector<std::string> &known_setting_keys() {
    static const std::vector<std::string> keys{
        "strategy",   "approach",     "window",      "stride",  "mask-left",     "mask-right",
        "overlap-n",  "combiner",     "boundary",    "lookahead", "overlap-size", "min-words-cut",
        "provider",   "edge-noise",   "noise-seed",  "input",   "output",        "labels",
        "reference",  "format",       "average",     "windows", "strides",       "lookaheads",
        "engine-version", "random-free"};
    return keys;
}

// Flat key=value store. Later `set` calls win, which gives the precedence
// flags > config file > preset defaults when filled in that order.
class Settings {
public:
    static Settings parse(std::istream &in) {
        Settings settings;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) {
                line.erase(hash);
            }
            const std::string trimmed = trim(line);
            if (trimmed.empty()) {
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw ParseError(line_no, "expected key=value, got '" + trimmed + "'");
            }
            const std::string key = trim(trimmed.substr(0, eq));
            if (!is_known(key)) {
                throw ParseError(line_no, "unknown setting '" + key + "'");
            }
            settings.set(key, trim(trimmed.substr(eq + 1)));
        }
        return settings;
    }

    static Settings load(const std::string &path) {
        std::ifstream in(path);
        if (!in) {
            throw Error(ErrorCategory::Io, "cannot open config file " + path);
        }
        return parse(in);
    }

    static bool is_known(std::string_view key) {
        for (const std::string &k : known_setting_keys()) {
            if (k == key) {
                return true;
            }
        }
        return false;
    }

    void set(const std::string &key, std::string value) { values_[key] = std::move(value); }

    bool has(const std::string &key) const { return values_.count(key) != 0; }

    std::optional<std::string> get(const std::string &key) const {
        const auto it = values_.find(key);
        return it == values_.end() ? std::nullopt : std::optional<std::string>(it->second);
    }

    std::string get_or(const std::string &key, std::string fallback) const {
        return get(key).value_or(std::move(fallback));
    }

    std::optional<std::size_t> get_size(const std::string &key) const {
        const auto v = get(key);
        if (!v) {
            return std::nullopt;
        }
        std::size_t out = 0;
        const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc{} || ptr != v->data() + v->size()) {
            throw Error(ErrorCategory::Usage, key + " must be a non-negative integer, got '" + *v + "'");
        }
        return out;
    }

    std::optional<double> get_double(const std::string &key) const {
        const auto v = get(key);
        if (!v) {
            return std::nullopt;
        }
        try {
            std::size_t used = 0;
            const double out = std::stod(*v, &used);
            if (used == v->size()) {
                return out;
            }
        } catch (const std::exception &) {
        }
        throw Error(ErrorCategory::Usage, key + " must be a number, got '" + *v + "'");
    }

    std::vector<std::size_t> get_size_list(const std::string &key) const {
        std::vector<std::size_t> out;
        const auto v = get(key);
        if (!v) {
            return out;
        }
        std::stringstream items(*v);
        std::string item;
        while (std::getline(items, item, ',')) {
            Settings one;
            one.set(key, trim(item));
            out.push_back(*one.get_size(key));
        }
        return out;
    }

    const std::map<std::string, std::string> &values() const { return values_; }

private:
    static std::string trim(std::string_view text) {
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string_view::npos) {
            return {};
        }
        const auto last = text.find_last_not_of(" \t\r\n");
        return std::string(text.substr(first, last - first + 1));
    }

    std::map<std::string, std::string> values_;
};

// ─── Providers from settings ─────────────────────────────────────────────────

enum class Approach { Tagging, Classification };

constexpr std::string_view to_string(Approach a) {
    return a == Approach::Classification ? "classification" : "tagging";
}

// "file:PATH" or "rule:PATH".
struct ProviderSource {
    enum class Kind { File, Rule };
    Kind kind = Kind::Rule;
    std::string path;

    static ProviderSource parse(std::string_view spec) {
        const auto colon = spec.find(':');
        if (colon == std::string_view::npos || colon + 1 == spec.size()) {
            throw Error(ErrorCategory::Usage, "provider must be file:PATH or rule:PATH, got '" +
                                                  std::string(spec) + "'");
        }
        const std::string_view kind = spec.substr(0, colon);
        ProviderSource source;
        source.path = std::string(spec.substr(colon + 1));
        if (kind == "file") {
            source.kind = Kind::File;
        } else if (kind == "rule") {
            source.kind = Kind::Rule;
        } else {
            throw Error(ErrorCategory::Usage, "unknown provider kind '" + std::string(kind) + "'");
        }
        return source;
    }
};

// Substitutes {w}, {s} and {l} in a provider template.
inline std::string expand_template(std::string text, std::size_t w, std::size_t s, std::size_t l) {
    const std::pair<std::string_view, std::string> subs[] = {
        {"{w}", std::to_string(w)}, {"{s}", std::to_string(s)}, {"{l}", std::to_string(l)}};
    for (const auto &[key, value] : subs) {
        for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
            text.replace(pos, key.size(), value);
        }
    }
    return text;
}

// ─── Manifest ────────────────────────────────────────────────────────────────

struct RunManifest {
    std::string strategy = "custom";
    Approach approach = Approach::Tagging;
    ResolvedStrategy resolved;
    std::size_t lookahead = 0;
    std::optional<std::size_t> overlap_size;
    std::optional<std::size_t> min_words_cut;
    std::string provider;
    double edge_noise = 0.0;
    std::uint64_t noise_seed = 0;
    std::string input;
    std::string output;
    std::string labels;
    std::string engine_version{kEngineVersion};

    // Re-reading this text with Settings::parse and resolve_manifest yields
    // the same manifest.
    std::string to_text() const {
        std::ostringstream out;
        const DecodingConfig &c = resolved.config;
        out << "engine-version=" << engine_version << '\n'
            << "random-free=true\n"
            << "approach=" << to_string(approach) << '\n'
            << "strategy=" << strategy << '\n'
            << "window=" << c.window << '\n';
        if (approach == Approach::Tagging) {
            out << "stride=" << c.stride << '\n'
                << "mask-left=" << c.mask_left << '\n'
                << "mask-right=" << c.mask_right << '\n'
                << "overlap-n=" << resolved.overlap << '\n'
                << "combiner=" << to_string(c.combiner) << '\n'
                << "boundary=" << to_string(c.boundary) << '\n';
            if (overlap_size) {
                out << "overlap-size=" << *overlap_size << '\n';
            }
            if (min_words_cut) {
                out << "min-words-cut=" << *min_words_cut << '\n';
            }
        }
        out << "lookahead=" << lookahead << '\n'
            << "provider=" << provider << '\n'
            << "edge-noise=" << wire::format_decimal(edge_noise) << '\n'
            << "noise-seed=" << noise_seed << '\n';
        if (!input.empty()) {
            out << "input=" << input << '\n';
        }
        if (!output.empty()) {
            out << "output=" << output << '\n';
        }
        if (!labels.empty()) {
            out << "labels=" << labels << '\n';
        }
        return out.str();
    }
};

inline Approach parse_approach(const Settings &s) {
    const std::string value = s.get_or("approach", "tagging");
    if (value == "tagging") {
        return Approach::Tagging;
    }
    if (value == "classification") {
        return Approach::Classification;
    }
    throw Error(ErrorCategory::Usage, "approach must be tagging or classification, got '" + value + "'");
}

inline CombinerKind parse_combiner_setting(const Settings &s) {
    const std::string value = s.get_or("combiner", "mean");
    const auto kind = parse_combiner(value);
    if (!kind) {
        throw Error(ErrorCategory::Usage, "combiner must be mean, entropy or hamming, got '" + value + "'");
    }
    return *kind;
}

// Resolves the preset named by `strategy`, then applies explicit stride,
// mask and boundary settings on top of what the preset computed.
inline ResolvedStrategy resolve_strategy(const Settings &s) {
    const std::string name = s.get_or("strategy", "custom");
    if (!is_preset_name(name)) {
        throw Error(ErrorCategory::Usage, "unknown strategy '" + name + "'");
    }
    const CombinerKind combiner = parse_combiner_setting(s);
    const std::size_t n = s.get_size("overlap-n").value_or(1);
    const auto window = s.get_size("window");
    const auto stride = s.get_size("stride");
    const auto ml = s.get_size("mask-left");
    const auto mr = s.get_size("mask-right");

    const auto require = [&](const char *key) {
        const auto v = s.get_size(key);
        if (!v) {
            throw Error(ErrorCategory::Usage, "strategy " + name + " needs --" + key);
        }
        return *v;
    };

    ResolvedStrategy out;
    if (name == "realtime") {
        out = preset_realtime(window.value_or(kRealtimeWindow), s.get_size("lookahead").value_or(0), combiner);
    } else if (name == "double-overlap") {
        out = preset_double_overlap(window.value_or(kReferenceWindow), ml.value_or(kReferenceMaskLeft),
                                    mr.value_or(kReferenceMaskRight), combiner);
    } else if (name == "overlapped-chunk") {
        out = preset_overlapped_chunk(require("stride"), require("overlap-size"), require("min-words-cut"),
                                      require("window"), combiner);
    } else {
        std::size_t w = 0;
        std::size_t left = 0;
        std::size_t right = 0;
        if (name == "unmasked") {
            w = window.value_or(kReferenceWindow);
        } else if (name == "masked") {
            w = window.value_or(kReferenceWindow);
            left = kReferenceMaskLeft;
            right = kReferenceMaskRight;
        } else {
            w = require("window");
        }
        left = ml.value_or(left);
        right = mr.value_or(right);
        out = stride ? custom_with_stride(w, *stride, left, right, combiner) : build_custom(w, left, right, n, combiner);
        if (stride && s.has("overlap-n")) {
            out.overlap = n;
        }
    }

    if (stride) {
        out.config.stride = *stride;
    }
    if (ml) {
        out.config.mask_left = *ml;
    }
    if (mr) {
        out.config.mask_right = *mr;
    }
    if (const auto b = s.get("boundary")) {
        const auto mode = parse_boundary(*b);
        if (!mode) {
            throw Error(ErrorCategory::Usage, "boundary must be waive or ramp, got '" + *b + "'");
        }
        out.config.boundary = *mode;
    }
    out.config.validate();
    return out;
}

inline RunManifest resolve_manifest(const Settings &s) {
    RunManifest m;
    m.approach = parse_approach(s);
    m.strategy = s.get_or("strategy", m.approach == Approach::Classification ? "realtime" : "custom");
    m.lookahead = s.get_size("lookahead").value_or(0);
    if (m.approach == Approach::Tagging) {
        m.resolved = resolve_strategy(s);
        if (m.strategy == "overlapped-chunk") {
            m.overlap_size = s.get_size("overlap-size");
            m.min_words_cut = s.get_size("min-words-cut");
        }
    } else {
        m.resolved.config.window = s.get_size("window").value_or(kRealtimeWindow);
        m.resolved.config.stride = 1;
        if (m.resolved.config.window < 2) {
            throw Error(ErrorCategory::Config, "classification window must be at least 2");
        }
    }
    m.provider = s.get_or("provider", "");
    if (m.provider.empty()) {
        throw Error(ErrorCategory::Usage, "a provider is required (--provider file:PATH or rule:PATH)");
    }
    ProviderSource::parse(m.provider);
    m.edge_noise = s.get_double("edge-noise").value_or(0.0);
    m.noise_seed = s.get_size("noise-seed").value_or(0);
    m.input = s.get_or("input", "");
    m.output = s.get_or("output", "");
    m.labels = s.get_or("labels", "");
    if (const auto v = s.get("engine-version"); v && *v != kEngineVersion) {
        throw Error(ErrorCategory::Config, "manifest was written by engine " + *v + ", this is " +
                                               std::string(kEngineVersion));
    }
    return m;
}

inline std::shared_ptr<const ProbabilityProvider> make_tagging_provider(const RunManifest &m) {
    const ProviderSource source = ProviderSource::parse(m.provider);
    std::shared_ptr<const ProbabilityProvider> provider;
    if (source.kind == ProviderSource::Kind::File) {
        provider = provider_from_file(source.path);
    } else {
        provider = rule_provider(RuleSet::load(source.path));
    }
    if (m.edge_noise > 0.0) {
        provider = noisy_boundary_provider(provider, m.edge_noise, m.noise_seed);
    }
    return provider;
}

inline std::shared_ptr<const SentenceProvider> make_sentence_provider(const RunManifest &m) {
    const ProviderSource source = ProviderSource::parse(m.provider);
    if (m.edge_noise > 0.0) {
        throw Error(ErrorCategory::Usage, "edge noise applies to tagging providers only");
    }
    if (source.kind == ProviderSource::Kind::Rule) {
        return std::make_shared<RuleSentenceProvider>(RuleSet::load(source.path));
    }
    auto provider = classification_provider_from_file(source.path);
    if (provider->window() && *provider->window() != m.resolved.config.window) {
        throw Error(ErrorCategory::Geometry, "classification file was exported for window " +
                                                 std::to_string(*provider->window()) + ", decoding uses " +
                                                 std::to_string(m.resolved.config.window));
    }
    return provider;
}

// ─── Runners ─────────────────────────────────────────────────────────────────

struct DecodeOutput {
    std::vector<PunctClass> labels;
    std::string text;        // punctuated transcript plus trailing newline
    std::string label_lines; // one label per line
};

inline DecodeOutput run_decode(const RunManifest &m, std::span<const std::string> tokens) {
    DecodeOutput out;
    if (m.approach == Approach::Tagging) {
        const auto provider = make_tagging_provider(m);
        out.labels = decode_tagging(tokens, *provider, m.resolved.config).labels;
    } else {
        const auto provider = make_sentence_provider(m);
        out.labels = decode_classification(*provider, tokens, m.lookahead, m.resolved.config.window);
    }
    out.text = render_punctuated(tokens, out.labels) + "\n";
    std::ostringstream labels;
    write_labels(labels, out.labels);
    out.label_lines = labels.str();
    return out;
}

inline DecodeOutput run_decode(const RunManifest &m) {
    if (m.input.empty()) {
        throw Error(ErrorCategory::Usage, "decode needs --input");
    }
    return run_decode(m, read_transcript(m.input));
}

// Labels with the 1-based line each came from.
struct LabelFile {
    std::vector<PunctClass> labels;
    std::vector<std::size_t> lines;
};

inline LabelFile read_label_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCategory::Io, "cannot open label file " + path);
    }
    LabelFile file;
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
        file.labels.push_back(*cls);
        file.lines.push_back(line_no);
    }
    return file;
}

inline EvalReport evaluate_files(const std::string &predicted_path, const std::string &reference_path,
                                 Averaging averaging) {
    LabelFile predicted;
    LabelFile reference;
    try {
        predicted = read_label_file(predicted_path);
    } catch (const ParseError &e) {
        throw Error(ErrorCategory::Parse, predicted_path + ": " + e.what());
    }
    try {
        reference = read_label_file(reference_path);
    } catch (const ParseError &e) {
        throw Error(ErrorCategory::Parse, reference_path + ": " + e.what());
    }
    if (predicted.labels.size() != reference.labels.size()) {
        const bool predicted_longer = predicted.labels.size() > reference.labels.size();
        const LabelFile &longer = predicted_longer ? predicted : reference;
        const LabelFile &shorter = predicted_longer ? reference : predicted;
        const std::string &longer_path = predicted_longer ? predicted_path : reference_path;
        const std::string &shorter_path = predicted_longer ? reference_path : predicted_path;
        const std::size_t shorter_end = shorter.lines.empty() ? 0 : shorter.lines.back();
        throw Error(ErrorCategory::Parse,
                    "label count mismatch: " + shorter_path + " has " + std::to_string(shorter.labels.size()) +
                        " labels (last at line " + std::to_string(shorter_end) + "), " + longer_path + " has " +
                        std::to_string(longer.labels.size()) + "; first unmatched label at line " +
                        std::to_string(longer.lines[shorter.labels.size()]) + " of " + longer_path);
    }
    return evaluate(predicted.labels, reference.labels, averaging);
}

enum class Format { Table, Records };

inline Format parse_format(const Settings &s) {
    const std::string value = s.get_or("format", "table");
    if (value == "table") {
        return Format::Table;
    }
    if (value == "records") {
        return Format::Records;
    }
    throw Error(ErrorCategory::Usage, "format must be table or records, got '" + value + "'");
}

inline Averaging parse_averaging_setting(const Settings &s) {
    const std::string value = s.get_or("average", "micro");
    const auto a = parse_averaging(value);
    if (!a) {
        throw Error(ErrorCategory::Usage, "average must be micro or macro, got '" + value + "'");
    }
    return *a;
}

inline std::string render_report(const EvalReport &report, Format format) {
    std::ostringstream out;
    if (format == Format::Table) {
        render_table(out, report);
    } else {
        render_records(out, report);
    }
    return out.str();
}

// ─── Sweep ───────────────────────────────────────────────────────────────────

struct SweepRow {
    SweepRun run;
    std::vector<double> f1; // overall F1 per lookahead, as fractions
    double mean_f1 = 0.0;
    bool best = false;
};

// Per-lookahead run a sweep row performs. Classification rows query the
// sentence provider with window w; tagging rows finalize s words per window
// with at least l words of right context (s = 1 is the real-time preset).
inline RunManifest sweep_manifest(const Settings &base, const SweepRun &run, std::size_t lookahead) {
    Settings s = base;
    s.set("window", std::to_string(run.window));
    s.set("lookahead", std::to_string(lookahead));
    s.set("provider", expand_template(base.get_or("provider", ""), run.window, run.stride, lookahead));
    if (parse_approach(base) == Approach::Tagging) {
        if (run.window < lookahead + run.stride) {
            throw Error(ErrorCategory::Config, "sweep row " + run.id + " cannot hold stride " +
                                                   std::to_string(run.stride) + " plus lookahead " +
                                                   std::to_string(lookahead));
        }
        s.set("strategy", "custom");
        s.set("stride", std::to_string(run.stride));
        s.set("mask-left", std::to_string(run.window - lookahead - run.stride));
        s.set("mask-right", std::to_string(lookahead));
        s.set("boundary", "ramp");
    }
    return resolve_manifest(s);
}

inline std::vector<SweepRow> run_sweep(const Settings &s) {
    const auto windows = s.get_size_list("windows");
    const auto strides = s.get_size_list("strides");
    auto lookaheads = s.get_size_list("lookaheads");
    if (!s.has("lookaheads")) {
        lookaheads = default_sweep_lookaheads();
    }
    const std::vector<SweepRun> grid = sweep_grid(windows, strides, lookaheads);
    const auto input = s.get("input");
    const auto reference = s.get("reference");
    if (!input || !reference) {
        throw Error(ErrorCategory::Usage, "sweep needs --input and --reference");
    }
    const std::vector<std::string> tokens = read_transcript(*input);
    const std::vector<PunctClass> gold = read_labels(*reference);
    const Averaging averaging = parse_averaging_setting(s);

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const SweepRun &run : grid) {
        SweepRow row{run, {}, 0.0, false};
        for (std::size_t l : run.lookaheads) {
            RunManifest m;
            try {
                m = sweep_manifest(s, run, l);
                const DecodeOutput out = run_decode(m, tokens);
                row.f1.push_back(evaluate(out.labels, gold, averaging).overall.scores.f1);
            } catch (const Error &e) {
                throw Error(e.category(), "sweep row " + run.id + " lookahead " + std::to_string(l) +
                                              " failed: " + e.what() + "\nmanifest:\n" + m.to_text());
            }
        }
        double sum = 0.0;
        for (double f : row.f1) {
            sum += f;
        }
        row.mean_f1 = sum / static_cast<double>(row.f1.size());
        rows.push_back(std::move(row));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].mean_f1 > rows[best].mean_f1) {
            best = i;
        }
    }
    rows[best].best = true;
    return rows;
}

inline std::string render_sweep(std::span<const SweepRow> rows, Format format) {
    std::ostringstream out;
    if (rows.empty()) {
        return {};
    }
    if (format == Format::Records) {
        for (const SweepRow &row : rows) {
            out << "{\"id\":" << wire::quote(row.run.id) << ",\"window\":" << row.run.window
                << ",\"stride\":" << row.run.stride << ",\"f1\":{";
            for (std::size_t i = 0; i < row.f1.size(); ++i) {
                out << (i > 0 ? "," : "") << '"' << row.run.lookaheads[i] << "\":" << wire::format_decimal(row.f1[i]);
            }
            out << "},\"mean_f1\":" << wire::format_decimal(row.mean_f1) << ",\"best\":" << (row.best ? "true" : "false")
                << "}\n";
        }
        return out.str();
    }
    char cell[64];
    std::snprintf(cell, sizeof cell, "%-12s %6s %6s", "run", "w", "s");
    out << cell;
    for (std::size_t l : rows.front().run.lookaheads) {
        std::snprintf(cell, sizeof cell, " %7s", ("F1@l=" + std::to_string(l)).c_str());
        out << cell;
    }
    out << "  mean F1\n";
    for (const SweepRow &row : rows) {
        std::snprintf(cell, sizeof cell, "%-12s %6zu %6zu", row.run.id.c_str(), row.run.window, row.run.stride);
        out << cell;
        for (double f : row.f1) {
            std::snprintf(cell, sizeof cell, " %7s", format_percent(f).c_str());
            out << cell;
        }
        std::snprintf(cell, sizeof cell, "  %7s%s\n", format_percent(row.mean_f1).c_str(), row.best ? " *" : "");
        out << cell;
    }
    return out.str();
}

} // namespace maskcombine
