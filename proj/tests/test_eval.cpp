#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "maskcombine/eval.hpp"

namespace mc = maskcombine;
using mc::PunctClass;

namespace {

constexpr PunctClass O = PunctClass::O;
constexpr PunctClass C = PunctClass::Comma;
constexpr PunctClass P = PunctClass::Period;
constexpr PunctClass Q = PunctClass::Question;

mc::EvalReport with_overall_f1(double f1) {
    mc::EvalReport report;
    report.overall.scores = mc::Scores{f1, f1, f1};
    return report;
}

std::vector<PunctClass> random_labels(std::mt19937_64 &rng, std::size_t n) {
    std::vector<PunctClass> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(mc::kAllClasses[rng() % 4]);
    }
    return out;
}

} // namespace

TEST(Evaluate, HandBuiltCommaCase) {
    // Comma: tp=2 (0, 3), fp=1 (5), fn=1 (7).
    const std::vector<PunctClass> ref{C, O, O, C, O, O, O, C, O, O};
    const std::vector<PunctClass> pred{C, O, O, C, O, C, O, O, O, O};
    const auto report = mc::evaluate(pred, ref);
    const auto &comma = report.at(C);
    EXPECT_EQ(comma.counts, (mc::ClassCounts{2, 1, 1}));
    EXPECT_EQ(mc::format_percent(comma.scores.precision), "66.7");
    EXPECT_EQ(mc::format_percent(comma.scores.recall), "66.7");
    EXPECT_EQ(mc::format_percent(comma.scores.f1), "66.7");
    EXPECT_EQ(report.words, 10u);
}

TEST(Evaluate, AllOGivesZeroScores) {
    const std::vector<PunctClass> ref{O, C, P, Q};
    const std::vector<PunctClass> pred(4, O);
    const auto report = mc::evaluate(pred, ref);
    for (PunctClass c : mc::kMarkClasses) {
        EXPECT_EQ(report.at(c).counts, (mc::ClassCounts{0, 0, 1}));
        EXPECT_EQ(report.at(c).scores, (mc::Scores{0, 0, 0}));
    }
    EXPECT_EQ(report.overall.scores, (mc::Scores{0, 0, 0}));
}

TEST(Evaluate, NothingToFindIsZeroNotNan) {
    const std::vector<PunctClass> all_o(5, O);
    const auto report = mc::evaluate(all_o, all_o);
    EXPECT_EQ(report.overall.scores, (mc::Scores{0, 0, 0}));
}

TEST(Evaluate, PerfectPrediction) {
    const std::vector<PunctClass> ref{O, C, P, Q, C};
    const auto report = mc::evaluate(ref, ref);
    for (PunctClass c : mc::kMarkClasses) {
        EXPECT_EQ(report.at(c).scores, (mc::Scores{1, 1, 1}));
    }
    EXPECT_EQ(report.overall.scores, (mc::Scores{1, 1, 1}));
}

TEST(Evaluate, ConfusionBetweenMarksCountsBothWays) {
    const auto report = mc::evaluate(std::vector<PunctClass>{P}, std::vector<PunctClass>{Q});
    EXPECT_EQ(report.at(P).counts, (mc::ClassCounts{0, 1, 0}));
    EXPECT_EQ(report.at(Q).counts, (mc::ClassCounts{0, 0, 1}));
}

TEST(Evaluate, LengthMismatchIsAnError) {
    EXPECT_THROW(mc::evaluate(std::vector<PunctClass>{O}, std::vector<PunctClass>{O, O}), mc::Error);
    EXPECT_THROW(mc::evaluate(std::vector<PunctClass>{O}, std::vector<PunctClass>{O}).at(O), mc::Error);
}

TEST(Evaluate, MicroAndMacroAveraging) {
    // Comma: tp=1 fp=0 fn=0, Period: tp=0 fp=0 fn=1, Question: tp=1 fp=1 fn=0.
    const std::vector<PunctClass> ref{C, P, Q, O};
    const std::vector<PunctClass> pred{C, O, Q, Q};
    const auto micro = mc::evaluate(pred, ref, mc::Averaging::Micro);
    EXPECT_EQ(micro.overall.counts, (mc::ClassCounts{2, 1, 1}));
    EXPECT_NEAR(micro.overall.scores.precision, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(micro.overall.scores.recall, 2.0 / 3.0, 1e-15);

    const auto macro = mc::evaluate(pred, ref, mc::Averaging::Macro);
    EXPECT_EQ(macro.overall.counts, micro.overall.counts);
    EXPECT_NEAR(macro.overall.scores.precision, (1.0 + 0.0 + 0.5) / 3.0, 1e-15);
    EXPECT_NEAR(macro.overall.scores.recall, (1.0 + 0.0 + 1.0) / 3.0, 1e-15);
    EXPECT_NEAR(macro.overall.scores.f1, (1.0 + 0.0 + 2.0 / 3.0) / 3.0, 1e-15);
}

TEST(Evaluate, PropertiesOverRandomLabels) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        const auto ref = random_labels(rng, n);
        const auto pred = random_labels(rng, n);
        const auto report = mc::evaluate(pred, ref);

        mc::ClassCounts sum;
        for (const auto &m : report.per_class) {
            sum.tp += m.counts.tp;
            sum.fp += m.counts.fp;
            sum.fn += m.counts.fn;
        }
        ASSERT_EQ(report.overall.counts, sum);

        // Swapping prediction and reference swaps precision and recall.
        const auto swapped = mc::evaluate(ref, pred);
        for (std::size_t c = 0; c < 3; ++c) {
            ASSERT_EQ(swapped.per_class[c].counts.fp, report.per_class[c].counts.fn);
            ASSERT_DOUBLE_EQ(swapped.per_class[c].scores.precision, report.per_class[c].scores.recall);
        }

        // Reordering words leaves every count unchanged.
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<PunctClass> ref2;
        std::vector<PunctClass> pred2;
        for (std::size_t i : order) {
            ref2.push_back(ref[i]);
            pred2.push_back(pred[i]);
        }
        ASSERT_EQ(mc::evaluate(pred2, ref2), report);
    }
}

TEST(Percent, RoundsHalfUp) {
    EXPECT_EQ(mc::format_percent(2.0 / 3.0), "66.7");
    EXPECT_EQ(mc::format_percent(0.7845), "78.5");
    EXPECT_EQ(mc::format_percent(0.784), "78.4");
    EXPECT_EQ(mc::format_percent(0.0), "0.0");
    EXPECT_EQ(mc::format_percent(1.0), "100.0");
}

// ─── Comparison ──────────────────────────────────────────────────────────────

TEST(CompareRuns, MaskedOverlapGain) {
    const std::vector<mc::NamedReport> reports{{"masked n=1", with_overall_f1(0.780)},
                                               {"masked n=4", with_overall_f1(0.784)}};
    const auto table = mc::compare_runs(reports, "masked n=1");
    ASSERT_EQ(table.rows.size(), 2u);
    EXPECT_EQ(mc::format_delta(table.rows[1].overall_delta.f1), "+0.4");
    EXPECT_EQ(mc::format_delta(table.rows[0].overall_delta.f1), "+0.0");
}

TEST(CompareRuns, UnmaskedOverlapGain) {
    const std::vector<mc::NamedReport> reports{{"unmasked n=1", with_overall_f1(0.765)},
                                               {"unmasked n=4", with_overall_f1(0.782)}};
    const auto table = mc::compare_runs(reports, "unmasked n=1");
    EXPECT_EQ(mc::format_delta(table.rows[1].overall_delta.f1), "+1.7");
    EXPECT_NEAR(table.rows[1].overall_delta.f1, 1.7, 1e-9);
}

TEST(CompareRuns, IdenticalReportsGiveZeroDeltas) {
    const std::vector<PunctClass> ref{C, P, Q, O, C};
    const std::vector<PunctClass> pred{C, O, Q, O, P};
    const auto r = mc::evaluate(pred, ref);
    const std::vector<mc::NamedReport> reports{{"a", r}, {"b", r}};
    const auto table = mc::compare_runs(reports, "a");
    for (const auto &row : table.rows) {
        for (double d : row.f1_delta) {
            EXPECT_EQ(d, 0.0);
        }
        EXPECT_EQ(row.overall_delta, (mc::Scores{0, 0, 0}));
    }
}

TEST(CompareRuns, NegativeDeltaAndErrors) {
    const std::vector<mc::NamedReport> reports{{"base", with_overall_f1(0.5)}, {"worse", with_overall_f1(0.45)}};
    EXPECT_EQ(mc::format_delta(mc::compare_runs(reports, "base").rows[1].overall_delta.f1), "-5.0");
    EXPECT_THROW(mc::compare_runs(reports, "missing"), mc::Error);
    EXPECT_THROW(mc::compare_runs(std::vector<mc::NamedReport>{reports[0]}, "base"), mc::Error);
}

// ─── Rendering ───────────────────────────────────────────────────────────────

TEST(Render, TableListsClassesAndOverall) {
    const std::vector<PunctClass> ref{C, O, O, C, O, O, O, C, O, O};
    const std::vector<PunctClass> pred{C, O, O, C, O, C, O, O, O, O};
    std::ostringstream out;
    mc::render_table(out, mc::evaluate(pred, ref));
    const std::string text = out.str();
    EXPECT_NE(text.find("COMMA"), std::string::npos);
    EXPECT_NE(text.find("66.7"), std::string::npos);
    EXPECT_NE(text.find("OVERALL (micro)"), std::string::npos);
}

TEST(Render, RecordsAreOneJsonObjectPerLine) {
    std::ostringstream out;
    mc::render_records(out, mc::evaluate(std::vector<PunctClass>{C, O}, std::vector<PunctClass>{C, P}));
    std::istringstream lines(out.str());
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
        const auto value = mc::wire::Json::parse(line);
        EXPECT_TRUE(value.contains("class"));
        ++count;
    }
    EXPECT_EQ(count, 4u);
    EXPECT_NE(out.str().find("{\"class\":\"COMMA\",\"tp\":1,\"fp\":0,\"fn\":0,\"precision\":1,"), std::string::npos);
}
