// maskcombine: mask-combine decoding for punctuation prediction.
//
//   maskcombine decode        --input words.txt --provider rule:rules.txt --strategy masked --overlap-n 4
//   maskcombine emit-windows  --input words.txt --window 20 --stride 5 --mask-left 3 --mask-right 6
//   maskcombine emit-instances --input words.txt --window 30 --lookahead 2
//   maskcombine eval          --predicted pred.txt --reference gold.txt --format table
//   maskcombine sweep         --windows 15,30,60 --strides 5 --provider file:cls_w{w}_s{s}_l{l}.jsonl ...

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maskcombine/app.hpp"

namespace {

using namespace maskcombine;

// String-valued flags that feed Settings; type checking happens on resolve.
class FlagSet {
public:
    void add(CLI::App *cmd, const std::string &key, const std::string &help) {
        options_[key] = cmd->add_option("--" + key, values_[key], help);
    }

    // Config file first, then any flag given on the command line on top.
    Settings settings(const std::string &config_path) const {
        Settings s = config_path.empty() ? Settings{} : Settings::load(config_path);
        for (const auto &[key, option] : options_) {
            if (option->count() > 0) {
                s.set(key, values_.at(key));
            }
        }
        return s;
    }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, CLI::Option *> options_;
};

void add_strategy_flags(FlagSet &flags, CLI::App *cmd) {
    flags.add(cmd, "strategy", "unmasked|masked|double-overlap|overlapped-chunk|realtime|custom");
    flags.add(cmd, "window", "window size w in words");
    flags.add(cmd, "stride", "stride s in words (default: computed from --overlap-n)");
    flags.add(cmd, "mask-left", "left mask m_l in words");
    flags.add(cmd, "mask-right", "right mask m_r in words");
    flags.add(cmd, "overlap-n", "predictions per interior word n (default 1)");
    flags.add(cmd, "combiner", "mean|entropy|hamming");
    flags.add(cmd, "boundary", "waive|ramp handling of the transcript start");
    flags.add(cmd, "lookahead", "right-context words l (realtime and classification)");
    flags.add(cmd, "overlap-size", "overlapped-chunk: overlap_size");
    flags.add(cmd, "min-words-cut", "overlapped-chunk: min_words_cut");
}

void write_output(const std::string &path, const std::string &content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) {
        throw Error(ErrorCategory::Io, "cannot write " + path);
    }
}

std::size_t transcript_length(const Settings &s, std::size_t length_flag) {
    if (const auto input = s.get("input")) {
        return read_transcript(*input).size();
    }
    if (length_flag == 0) {
        throw Error(ErrorCategory::Usage, "give --input or --length");
    }
    return length_flag;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Mask-combine decoding for punctuation prediction", "maskcombine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kEngineVersion));

    std::string config_path;
    std::string manifest_out;
    std::size_t length = 0;
    std::vector<std::string> predicted;
    std::string baseline;

    // decode
    FlagSet decode_flags;
    CLI::App *decode = app.add_subcommand("decode", "punctuate a transcript");
    add_strategy_flags(decode_flags, decode);
    decode_flags.add(decode, "approach", "tagging|classification");
    decode_flags.add(decode, "provider", "file:PATH or rule:PATH");
    decode_flags.add(decode, "edge-noise", "degrade predictions near window edges (0..1)");
    decode_flags.add(decode, "noise-seed", "seed for --edge-noise");
    decode_flags.add(decode, "input", "transcript, whitespace-separated words");
    decode_flags.add(decode, "output", "punctuated text (default stdout)");
    decode_flags.add(decode, "labels", "label file, one label per word");
    decode->add_option("--config", config_path, "flat key=value config or manifest");
    decode->add_option("--manifest-out", manifest_out, "write the resolved run manifest here");

    // emit-windows
    FlagSet windows_flags;
    CLI::App *emit_windows = app.add_subcommand("emit-windows", "print the window plan for an exporter");
    add_strategy_flags(windows_flags, emit_windows);
    windows_flags.add(emit_windows, "input", "transcript (its length sets the plan)");
    windows_flags.add(emit_windows, "output", "plan file (default stdout)");
    emit_windows->add_option("--length", length, "transcript length when no --input is given");
    emit_windows->add_option("--config", config_path, "flat key=value config");

    // emit-instances
    FlagSet instance_flags;
    CLI::App *emit_instances = app.add_subcommand("emit-instances", "print [PUNCT] classification instances");
    instance_flags.add(emit_instances, "input", "transcript");
    instance_flags.add(emit_instances, "window", "instance window w (default 30)");
    instance_flags.add(emit_instances, "lookahead", "right-context words l (default 0)");
    instance_flags.add(emit_instances, "reference", "reference labels attached as targets");
    instance_flags.add(emit_instances, "output", "instance records (default stdout)");
    emit_instances->add_option("--config", config_path, "flat key=value config");

    // eval
    FlagSet eval_flags;
    CLI::App *eval = app.add_subcommand("eval", "score predicted labels against a reference");
    eval->add_option("--predicted", predicted, "predicted label file (repeat to compare runs)")->required();
    eval_flags.add(eval, "reference", "reference label file");
    eval_flags.add(eval, "format", "table|records");
    eval_flags.add(eval, "average", "micro|macro overall averaging");
    eval_flags.add(eval, "output", "report file (default stdout)");
    eval->add_option("--baseline", baseline, "predicted file the comparison is relative to (default: first)");
    eval->add_option("--config", config_path, "flat key=value config");

    // sweep
    FlagSet sweep_flags;
    CLI::App *sweep = app.add_subcommand("sweep", "average F1 over lookaheads for a window/stride grid");
    sweep_flags.add(sweep, "windows", "comma-separated window sizes");
    sweep_flags.add(sweep, "strides", "comma-separated strides");
    sweep_flags.add(sweep, "lookaheads", "comma-separated lookaheads (default 0,1,2,3,4)");
    sweep_flags.add(sweep, "approach", "classification|tagging");
    sweep_flags.add(sweep, "provider", "provider template; {w} {s} {l} are substituted");
    sweep_flags.add(sweep, "combiner", "mean|entropy|hamming (tagging)");
    sweep_flags.add(sweep, "edge-noise", "degrade predictions near window edges (tagging)");
    sweep_flags.add(sweep, "noise-seed", "seed for --edge-noise");
    sweep_flags.add(sweep, "input", "transcript");
    sweep_flags.add(sweep, "reference", "reference label file");
    sweep_flags.add(sweep, "format", "table|records");
    sweep_flags.add(sweep, "average", "micro|macro overall averaging");
    sweep_flags.add(sweep, "output", "results table (default stdout)");
    sweep->add_option("--config", config_path, "flat key=value config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::fprintf(stderr, "maskcombine: error[usage]: %s\n", e.what());
        return exit_code(ErrorCategory::Usage);
    }

    try {
        if (*decode) {
            const Settings s = decode_flags.settings(config_path);
            const RunManifest manifest = resolve_manifest(s);
            const DecodeOutput out = run_decode(manifest);
            write_output(manifest.output, out.text);
            if (!manifest.labels.empty()) {
                write_output(manifest.labels, out.label_lines);
            }
            if (!manifest_out.empty()) {
                write_output(manifest_out, manifest.to_text());
            }
        } else if (*emit_windows) {
            const Settings s = windows_flags.settings(config_path);
            const ResolvedStrategy strategy = resolve_strategy(s);
            const auto plan = generate_windows(transcript_length(s, length), strategy.config);
            std::ostringstream out;
            write_window_plan(out, plan);
            write_output(s.get_or("output", ""), out.str());
        } else if (*emit_instances) {
            const Settings s = instance_flags.settings(config_path);
            const auto input = s.get("input");
            if (!input) {
                throw Error(ErrorCategory::Usage, "emit-instances needs --input");
            }
            TokenStream stream{read_transcript(*input), std::nullopt};
            if (const auto ref = s.get("reference")) {
                stream.labels = read_labels(*ref);
            }
            const auto instances = stream_instances(stream, s.get_size("lookahead").value_or(0),
                                                    s.get_size("window").value_or(kRealtimeWindow));
            std::ostringstream out;
            write_instances(out, instances);
            write_output(s.get_or("output", ""), out.str());
        } else if (*eval) {
            const Settings s = eval_flags.settings(config_path);
            const auto reference = s.get("reference");
            if (!reference) {
                throw Error(ErrorCategory::Usage, "eval needs --reference");
            }
            const Format format = parse_format(s);
            const Averaging averaging = parse_averaging_setting(s);
            std::string rendered;
            std::vector<NamedReport> reports;
            for (const std::string &path : predicted) {
                reports.push_back(NamedReport{path, evaluate_files(path, *reference, averaging)});
                if (predicted.size() > 1) {
                    rendered += (format == Format::Table ? "== " + path + "\n" : "");
                }
                rendered += render_report(reports.back().report, format);
            }
            if (reports.size() > 1 && format == Format::Table) {
                std::ostringstream table;
                render_comparison(table, compare_runs(reports, baseline.empty() ? predicted.front() : baseline));
                rendered += "\n" + table.str();
            }
            write_output(s.get_or("output", ""), rendered);
        } else if (*sweep) {
            Settings s = sweep_flags.settings(config_path);
            if (!s.has("approach")) {
                s.set("approach", "classification");
            }
            const auto rows = run_sweep(s);
            write_output(s.get_or("output", ""), render_sweep(rows, parse_format(s)));
        }
    } catch (const Error &e) {
        std::fprintf(stderr, "maskcombine: error[%s]: %s\n", std::string(to_string(e.category())).c_str(), e.what());
        return exit_code(e.category());
    } catch (const std::exception &e) {
        std::fprintf(stderr, "maskcombine: error[internal]: %s\n", e.what());
        return 1;
    }
    return 0;
}
