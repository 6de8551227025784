#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "maskcombine/classify.hpp"
#include "maskcombine/decode.hpp"
#include "maskcombine/strategies.hpp"
#include "support.hpp"

namespace mc = maskcombine;
using Tokens = std::vector<std::string>;

namespace {

const Tokens kAbcde{"a", "b", "c", "d", "e"};
const std::string kSentinel{mc::kPunctSentinel};

} // namespace

TEST(BuildInstance, NoTruncationNeeded) {
    const auto inst = mc::build_instance(kAbcde, 2, 2, 10);
    EXPECT_EQ(inst.tokens, (Tokens{"a", "b", "c", kSentinel, "d", "e"}));
    EXPECT_EQ(inst.punct_index, 3u);
    EXPECT_EQ(inst.right_context(), 2u);
}

TEST(BuildInstance, TruncatesFromTheLeft) {
    const auto inst = mc::build_instance(kAbcde, 2, 2, 4);
    EXPECT_EQ(inst.tokens, (Tokens{"c", kSentinel, "d", "e"}));
    EXPECT_EQ(inst.punct_index, 1u);
}

TEST(BuildInstance, LastWordClampsRightContext) {
    const auto inst = mc::build_instance(kAbcde, 4, 3, 10);
    EXPECT_EQ(inst.tokens.back(), kSentinel);
    EXPECT_EQ(inst.right_context(), 0u);
    EXPECT_EQ(inst.lookahead, 3u);
}

TEST(BuildInstance, LookaheadBeyondTranscriptClamps) {
    const auto inst = mc::build_instance(kAbcde, 1, 50, 100);
    EXPECT_EQ(inst.tokens, (Tokens{"a", "b", kSentinel, "c", "d", "e"}));
}

TEST(BuildInstance, RejectsWindowThatCannotHoldSentinelAndContext) {
    EXPECT_THROW(mc::build_instance(kAbcde, 2, 0, 1), mc::Error);
    EXPECT_THROW(mc::build_instance(kAbcde, 2, 2, 3), mc::Error);
    EXPECT_NO_THROW(mc::build_instance(kAbcde, 4, 2, 2)); // right context clamps to 0
    EXPECT_THROW(mc::build_instance(kAbcde, 5, 0, 10), mc::Error);
}

TEST(StreamInstances, OnePerWordInOrder) {
    mc::TokenStream stream;
    stream.tokens = kAbcde;
    const auto instances = mc::stream_instances(stream, 1, 30);
    ASSERT_EQ(instances.size(), 5u);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        EXPECT_EQ(instances[i].word_index, i);
        EXPECT_FALSE(instances[i].target);
    }
}

TEST(StreamInstances, ZeroLookaheadEndsWithSentinel) {
    const auto stream = mc::testing::synthetic_stream(40, 5);
    for (const auto &inst : mc::stream_instances(stream, 0, 8)) {
        EXPECT_EQ(inst.tokens.back(), kSentinel);
    }
}

TEST(StreamInstances, AttachesTargets) {
    const auto stream = mc::testing::synthetic_stream(30, 2);
    const auto instances = mc::stream_instances(stream, 2, 12);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        EXPECT_EQ(instances[i].target, (*stream.labels)[i]);
    }
}

TEST(StreamInstances, LongerLookaheadOnlyAddsRightContextAndLeftTruncation) {
    const auto stream = mc::testing::synthetic_stream(60, 8);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto a = mc::build_instance(stream.tokens, i, 1, 10);
        const auto b = mc::build_instance(stream.tokens, i, 3, 10);
        const Tokens a_left(a.tokens.begin(), a.tokens.begin() + static_cast<long>(a.punct_index));
        const Tokens b_left(b.tokens.begin(), b.tokens.begin() + static_cast<long>(b.punct_index));
        ASSERT_LE(b_left.size(), a_left.size());
        EXPECT_TRUE(std::equal(b_left.begin(), b_left.end(), a_left.end() - static_cast<long>(b_left.size())));
        const Tokens a_right(a.tokens.begin() + static_cast<long>(a.punct_index) + 1, a.tokens.end());
        const Tokens b_right(b.tokens.begin() + static_cast<long>(b.punct_index) + 1, b.tokens.end());
        EXPECT_TRUE(std::equal(a_right.begin(), a_right.end(), b_right.begin()));
    }
}

TEST(Instances, PropertiesOverRandomInputs) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t len = mc::testing::uniform_index(rng, 1, 80);
        const auto stream = mc::testing::synthetic_stream(len, rng());
        const std::size_t l = mc::testing::uniform_index(rng, 0, 6);
        const std::size_t i = mc::testing::uniform_index(rng, 0, len - 1);
        const std::size_t right = std::min(l, len - 1 - i);
        const std::size_t w = mc::testing::uniform_index(rng, right + 2, 40);
        const auto inst = mc::build_instance(stream.tokens, i, l, w);

        ASSERT_EQ(std::count(inst.tokens.begin(), inst.tokens.end(), kSentinel), 1);
        ASSERT_EQ(inst.tokens[inst.punct_index], kSentinel);
        ASSERT_LE(inst.tokens.size(), w);
        ASSERT_EQ(inst.tokens[inst.punct_index - 1], stream.tokens[i]);
        ASSERT_EQ(inst.right_context(), right);
        // Without the sentinel the instance is a contiguous slice ending at i + right.
        Tokens words = inst.tokens;
        words.erase(words.begin() + static_cast<long>(inst.punct_index));
        const std::size_t first = i + right + 1 - words.size();
        ASSERT_TRUE(std::equal(words.begin(), words.end(), stream.tokens.begin() + static_cast<long>(first)));
        if (first > 0) {
            ASSERT_EQ(inst.tokens.size(), w);
        }
    }
}

TEST(DecodeClassification, RuleProviderRecoversMarkedLabels) {
    const auto stream = mc::testing::synthetic_stream(200, 4);
    const mc::RuleSentenceProvider provider(mc::RuleSet::standard(0.9));
    EXPECT_EQ(mc::decode_classification(provider, stream.tokens, 2, 30), *stream.labels);
}

TEST(DecodeClassification, MatchesRealtimeTaggingWithRuleProvider) {
    const auto stream = mc::testing::synthetic_stream(150, 6);
    const mc::RuleSentenceProvider sentence(mc::RuleSet::standard(0.8));
    const auto tagger = mc::rule_provider(mc::RuleSet::standard(0.8));
    for (std::size_t l = 0; l <= 4; ++l) {
        const auto tagged = mc::decode_tagging(stream.tokens, *tagger, mc::preset_realtime(30, l).config);
        EXPECT_EQ(mc::decode_classification(sentence, stream.tokens, l, 30), tagged.labels) << "l=" << l;
    }
}

TEST(DecodeClassification, EmptyTranscript) {
    const mc::RuleSentenceProvider provider(mc::RuleSet::standard());
    EXPECT_TRUE(mc::decode_classification(provider, Tokens{}, 2, 30).empty());
}

TEST(DecodeClassification, ErrorsCarryWordIndex) {
    mc::ClassificationFile file;
    file.transcript_hash = mc::wire::transcript_hash(kAbcde);
    file.records.push_back({0, {1, 0, 0, 0}, std::nullopt, std::nullopt});
    const mc::ClassificationFileProvider provider(file);
    try {
        mc::decode_classification(provider, kAbcde, 0, 10);
        FAIL();
    } catch (const mc::Error &e) {
        EXPECT_EQ(e.category(), mc::ErrorCategory::Geometry);
        EXPECT_NE(std::string(e.what()).find("word 1"), std::string::npos);
    }
}

// ─── Classification files ────────────────────────────────────────────────────

namespace {

mc::ClassificationFile export_file(const mc::TokenStream &stream, std::size_t l, std::size_t w) {
    const mc::RuleSentenceProvider rules(mc::RuleSet::standard(0.75));
    mc::ClassificationFile file;
    file.transcript_hash = mc::wire::transcript_hash(stream.tokens);
    file.lookahead = l;
    file.window = w;
    for (const auto &inst : mc::stream_instances(stream, l, w)) {
        file.records.push_back({inst.word_index, rules.classify(inst).probs(), inst.tokens, inst.punct_index});
    }
    return file;
}

} // namespace

TEST(ClassificationFile, RoundTripAndReplay) {
    const auto stream = mc::testing::synthetic_stream(50, 12);
    const auto file = export_file(stream, 2, 12);
    std::ostringstream out;
    mc::write_classification(out, file);
    std::istringstream in(out.str());
    const mc::ClassificationFileProvider provider(mc::parse_classification(in));
    EXPECT_EQ(provider.window(), 12u);
    EXPECT_EQ(mc::decode_classification(provider, stream.tokens, 2, 12), *stream.labels);

    std::ostringstream again;
    std::istringstream in2(out.str());
    mc::write_classification(again, mc::parse_classification(in2));
    EXPECT_EQ(again.str(), out.str());
}

TEST(ClassificationFile, RejectsMismatchedLookaheadInstanceOrTranscript) {
    const auto stream = mc::testing::synthetic_stream(20, 13);
    const mc::ClassificationFileProvider provider(export_file(stream, 2, 12));
    EXPECT_THROW(mc::decode_classification(provider, stream.tokens, 1, 12), mc::Error);
    EXPECT_THROW(mc::decode_classification(provider, stream.tokens, 2, 6), mc::Error);
    auto other = stream.tokens;
    other[0] = "different";
    EXPECT_THROW(mc::decode_classification(provider, other, 2, 12), mc::Error);
}

TEST(ClassificationFile, ParseErrorsCarryLineNumbers) {
    std::istringstream in(R"({"class_order":["O","COMMA","PERIOD","QUESTION"],"transcript_hash":"cbf29ce484222325"})"
                          "\n"
                          R"({"word_index":0,"probs":[0.2,0.2,0.2]})"
                          "\n");
    try {
        mc::parse_classification(in);
        FAIL();
    } catch (const mc::ParseError &e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(WriteInstances, OneRecordPerInstance) {
    mc::TokenStream stream;
    stream.tokens = {"hi", "there"};
    stream.labels = std::vector<mc::PunctClass>{mc::PunctClass::O, mc::PunctClass::Question};
    const auto instances = mc::stream_instances(stream, 1, 5);
    std::ostringstream out;
    mc::write_instances(out, instances);
    EXPECT_EQ(out.str(), "{\"word_index\":0,\"tokens\":[\"hi\",\"[PUNCT]\",\"there\"],\"punct_index\":1,\"target\":\"O\"}\n"
                         "{\"word_index\":1,\"tokens\":[\"hi\",\"there\",\"[PUNCT]\"],\"punct_index\":2,"
                         "\"target\":\"QUESTION\"}\n");
}
