#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maskcombine/core.hpp"
#include "maskcombine/wire.hpp"

namespace maskcombine {

struct ClassCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    friend bool operator==(const ClassCounts &, const ClassCounts &) = default;
};

// Fractions in [0, 1].
struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const Scores &, const Scores &) = default;
};

struct ClassMetrics {
    ClassCounts counts;
    Scores scores;

    friend bool operator==(const ClassMetrics &, const ClassMetrics &) = default;
};

enum class Averaging { Micro, Macro };

constexpr std::string_view to_string(Averaging a) { return a == Averaging::Macro ? "macro" : "micro"; }

inline std::optional<Averaging> parse_averaging(std::string_view name) {
    const std::string lowered = detail::lowercase(name);
    if (lowered == "micro") {
        return Averaging::Micro;
    }
    if (lowered == "macro") {
        return Averaging::Macro;
    }
    return std::nullopt;
}

struct EvalReport {
    // Indexed like kMarkClasses: Comma, Period, Question.
    std::array<ClassMetrics, 3> per_class{};
    // Counts are always the per-class sums; scores follow `averaging`.
    ClassMetrics overall;
    Averaging averaging = Averaging::Micro;
    std::size_t words = 0;

    const ClassMetrics &at(PunctClass c) const {
        if (c == PunctClass::O) {
            throw Error(ErrorCategory::Config, "O is not scored");
        }
        return per_class[index_of(c) - 1];
    }

    friend bool operator==(const EvalReport &, const EvalReport &) = default;
};

// 0/0 is defined as 0 throughout.
inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline Scores scores_from_counts(const ClassCounts &c) {
    Scores s;
    s.precision = safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    s.recall = safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    s.f1 = safe_ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    return s;
}

inline EvalReport evaluate(std::span<const PunctClass> predicted, std::span<const PunctClass> reference,
                           Averaging averaging = Averaging::Micro) {
    if (predicted.size() != reference.size()) {
        throw Error(ErrorCategory::Parse, "predicted has " + std::to_string(predicted.size()) +
                                              " labels, reference has " + std::to_string(reference.size()));
    }
    EvalReport report;
    report.averaging = averaging;
    report.words = predicted.size();
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const PunctClass p = predicted[i];
        const PunctClass r = reference[i];
        if (p == r) {
            if (p != PunctClass::O) {
                ++report.per_class[index_of(p) - 1].counts.tp;
            }
            continue;
        }
        if (p != PunctClass::O) {
            ++report.per_class[index_of(p) - 1].counts.fp;
        }
        if (r != PunctClass::O) {
            ++report.per_class[index_of(r) - 1].counts.fn;
        }
    }
    Scores macro;
    for (ClassMetrics &m : report.per_class) {
        m.scores = scores_from_counts(m.counts);
        report.overall.counts.tp += m.counts.tp;
        report.overall.counts.fp += m.counts.fp;
        report.overall.counts.fn += m.counts.fn;
        macro.precision += m.scores.precision / 3.0;
        macro.recall += m.scores.recall / 3.0;
        macro.f1 += m.scores.f1 / 3.0;
    }
    report.overall.scores = averaging == Averaging::Micro ? scores_from_counts(report.overall.counts) : macro;
    return report;
}

// Percentage with one decimal, rounded half up (0.6666 -> 66.7).
inline double round_percent(double fraction) { return std::floor(fraction * 1000.0 + 0.5 + 1e-9) / 10.0; }

inline std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", round_percent(fraction));
    return buf;
}

// ─── Rendering ───────────────────────────────────────────────────────────────

inline void render_table(std::ostream &out, const EvalReport &report) {
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %7s %7s %7s %9s %7s %7s\n", "class", "tp", "fp", "fn", "precision",
                  "recall", "f1");
    out << line;
    const auto row = [&](std::string_view name, const ClassMetrics &m) {
        std::snprintf(line, sizeof line, "%-18.*s %7zu %7zu %7zu %9s %7s %7s\n", static_cast<int>(name.size()),
                      name.data(), m.counts.tp, m.counts.fp, m.counts.fn, format_percent(m.scores.precision).c_str(),
                      format_percent(m.scores.recall).c_str(), format_percent(m.scores.f1).c_str());
        out << line;
    };
    for (std::size_t i = 0; i < kMarkClasses.size(); ++i) {
        row(wire_name(kMarkClasses[i]), report.per_class[i]);
    }
    const std::string overall = "OVERALL (" + std::string(to_string(report.averaging)) + ")";
    row(overall, report.overall);
}

inline void render_records(std::ostream &out, const EvalReport &report) {
    const auto record = [&](std::string_view name, const ClassMetrics &m) {
        out << "{\"class\":" << wire::quote(name) << ",\"tp\":" << m.counts.tp << ",\"fp\":" << m.counts.fp
            << ",\"fn\":" << m.counts.fn << ",\"precision\":" << wire::format_decimal(m.scores.precision)
            << ",\"recall\":" << wire::format_decimal(m.scores.recall)
            << ",\"f1\":" << wire::format_decimal(m.scores.f1);
    };
    for (std::size_t i = 0; i < kMarkClasses.size(); ++i) {
        record(wire_name(kMarkClasses[i]), report.per_class[i]);
        out << "}\n";
    }
    record("OVERALL", report.overall);
    out << ",\"average\":" << wire::quote(to_string(report.averaging)) << ",\"words\":" << report.words << "}\n";
}

// ─── Run comparison ──────────────────────────────────────────────────────────

struct NamedReport {
    std::string name;
    EvalReport report;
};

// Differences against the baseline, in absolute percentage points.
struct ComparisonRow {
    std::string name;
    std::array<double, 3> f1_delta{}; // Comma, Period, Question
    Scores overall_delta;
    double overall_f1 = 0.0; // candidate's own overall F1, as a fraction
};

struct Comparison {
    std::string baseline;
    std::vector<ComparisonRow> rows; // input order, baseline included
};

inline Comparison compare_runs(std::span<const NamedReport> reports, std::string_view baseline) {
    if (reports.size() < 2) {
        throw Error(ErrorCategory::Config, "comparison needs at least two reports");
    }
    const NamedReport *base = nullptr;
    for (const NamedReport &r : reports) {
        if (r.name == baseline) {
            base = &r;
            break;
        }
    }
    if (base == nullptr) {
        throw Error(ErrorCategory::Config, "baseline '" + std::string(baseline) + "' not among the reports");
    }
    const auto points = [](double candidate, double reference) { return 100.0 * (candidate - reference); };
    Comparison table{std::string(baseline), {}};
    for (const NamedReport &r : reports) {
        ComparisonRow row;
        row.name = r.name;
        for (std::size_t i = 0; i < 3; ++i) {
            row.f1_delta[i] = points(r.report.per_class[i].scores.f1, base->report.per_class[i].scores.f1);
        }
        const Scores &c = r.report.overall.scores;
        const Scores &b = base->report.overall.scores;
        row.overall_delta = Scores{points(c.precision, b.precision), points(c.recall, b.recall), points(c.f1, b.f1)};
        row.overall_f1 = c.f1;
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline std::string format_delta(double points) {
    char buf[32];
    const double rounded = std::floor(std::abs(points) * 10.0 + 0.5 + 1e-9) / 10.0;
    std::snprintf(buf, sizeof buf, "%c%.1f", points < 0.0 && rounded > 0.0 ? '-' : '+', rounded);
    return buf;
}

inline void render_comparison(std::ostream &out, const Comparison &table) {
    char line[200];
    std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s %8s %8s %8s\n", "run", "F1", "dCOMMA", "dPERIOD",
                  "dQUEST", "dP", "dR", "dF1");
    out << line;
    for (const ComparisonRow &row : table.rows) {
        std::snprintf(line, sizeof line, "%-24.24s %8s %8s %8s %8s %8s %8s %8s\n", row.name.c_str(),
                      format_percent(row.overall_f1).c_str(), format_delta(row.f1_delta[0]).c_str(),
                      format_delta(row.f1_delta[1]).c_str(), format_delta(row.f1_delta[2]).c_str(),
                      format_delta(row.overall_delta.precision).c_str(),
                      format_delta(row.overall_delta.recall).c_str(), format_delta(row.overall_delta.f1).c_str());
        out << line;
    }
}

} // namespace maskcombine
