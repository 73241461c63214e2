#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "factsum/prompt.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace factsum;
using factsum::testing::fixture_path;

namespace {

std::string golden(const std::string& name) { return detail::read_file(fixture_path("golden/" + name + ".txt")); }

std::string n_words(std::size_t n, const std::string& word = "word") {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + word;
    return out;
}

Document doc(std::string id, std::string source, std::string target = "") {
    Document d;
    d.id = std::move(id);
    d.source = std::move(source);
    d.target = std::move(target);
    return d;
}

} // namespace

TEST(PythonRepr, QuoteSelection) {
    EXPECT_EQ(python_repr("plain"), "'plain'");
    EXPECT_EQ(python_repr("it's"), "\"it's\"");
    EXPECT_EQ(python_repr("say \"hi\""), "'say \"hi\"'");
    EXPECT_EQ(python_repr("both ' and \""), "'both \\' and \"'");
    EXPECT_EQ(python_repr("back\\slash"), "'back\\\\slash'");
    EXPECT_EQ(python_repr("tab\there\n"), "'tab\\there\\n'");
}

TEST(SerializeRelation, MatchesDiedOnGolden) {
    EXPECT_EQ(serialize_relation("Sally Forrest", "died on", "March 15"), golden("relation_died_on"));
}

TEST(SerializeRelation, DoubleQuotesObjectWithApostrophe) {
    EXPECT_EQ(serialize_relation("Prince Harry", "is in", "attendance for England 's crunch match against France"),
              golden("relation_double_quoted"));
}

TEST(SerializeRelation, MatchesTakenFromGolden) {
    EXPECT_EQ(serialize_relation("valuable stock", "taken from", "his antiques shop in Basingstoke"),
              golden("relation_taken_from"));
}

TEST(SerializeRelation, MixedQuotesAndBackslashes) {
    EXPECT_EQ(serialize_relation("the \"Iron Lady\"", "wasn't", "it's \\ odd"), golden("mixed_quotes"));
}

TEST(SerializeRelation, FromExtractedTriple) {
    const auto ex = extract_document("Sally Forrest died on March 15.", factsum::testing::annotator());
    ASSERT_EQ(ex.triples.size(), 1u);
    EXPECT_EQ(serialize_relation(ex.triples[0]), golden("relation_died_on"));
}

TEST(PromptedSource, PrependsPromptLineAndStripsBack) {
    const auto d = doc("a", "Sally Forrest, an actress, died on March 15. She was 86.", "t");
    const auto ex = extract_document("Sally Forrest died on March 15.", factsum::testing::annotator());
    const auto p = build_prompted_source(d, ex.triples[0]);
    EXPECT_EQ(p.modified_source, golden("relation_died_on") + "\n" + d.source);
    EXPECT_TRUE(p.modified_source.starts_with("Key relation: "));
    EXPECT_EQ(strip_prompt(p.modified_source), d.source);
    EXPECT_THROW(strip_prompt("no separator"), DataError);
}

TEST(Tldr, AppendsSuffix) {
    EXPECT_EQ(build_tldr_input(doc("a", "Some text.")), "Some text.\nTL;DR:");
    EXPECT_THROW(build_tldr_input(doc("b", "")), DataError);
}

TEST(SampleOrdered, DistinctSortedInRange) {
    SeededRng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(rng.below(20));
        const auto s = sample_ordered(rng, n, 3);
        ASSERT_EQ(s.size(), 3u);
        EXPECT_LT(s[0], s[1]);
        EXPECT_LT(s[1], s[2]);
        EXPECT_LT(s[2], n);
    }
}

TEST(SampleOrdered, RoughlyUniform) {
    SeededRng rng(17);
    std::vector<int> hits(6, 0);
    const int trials = 60000;
    for (int t = 0; t < trials; ++t)
        for (auto i : sample_ordered(rng, 6, 3)) ++hits[i];
    // Each index is chosen with probability 1/2.
    for (int h : hits) EXPECT_NEAR(h, trials / 2, trials / 50);
}

class SenEx : public ::testing::Test {
protected:
    std::vector<Document> docs = {
        doc("a", "Barack Obama was born in Hawaii. He later moved to Chicago."),
        doc("b", "The match ended late on Saturday night! Fans left happy."),
        doc("c", "Hi. Short one."),
        doc("d", "Sally Forrest died on March 15 at her home in Beverly Hills, California. She was 86."),
    };
};

TEST_F(SenEx, Mode1TargetIsFirstSentence) {
    const auto set = build_senex_dataset(docs, SenExMode::SenEx1, 0, factsum::testing::any_vocab());
    ASSERT_EQ(set.documents.size(), 4u);
    EXPECT_EQ(set.documents[0].target, "Barack Obama was born in Hawaii.");
    EXPECT_EQ(set.documents[1].target, "The match ended late on Saturday night!");
    EXPECT_EQ(set.documents[2].target, "Hi.");
    EXPECT_FALSE(set.documents[0].prompt.has_value());
    EXPECT_TRUE(set.skipped.empty());
}

TEST_F(SenEx, Mode2HintIsFirstThreeTokens) {
    const auto& v = factsum::testing::any_vocab();
    const auto set = build_senex_dataset(docs, SenExMode::SenEx2, 0, v);
    for (const auto& d : set.documents) {
        const auto tokens = encode(v, d.target);
        ASSERT_GE(tokens.size(), 3u);
        EXPECT_EQ(*d.prompt, tokens[0].text + tokens[1].text + tokens[2].text);
        EXPECT_EQ(d.extra["hint_token_positions"], nlohmann::json({0, 1, 2}));
    }
}

TEST_F(SenEx, ShortTargetsAreSkippedForHintModes) {
    const auto& v = factsum::testing::any_vocab();
    const auto set = build_senex_dataset(docs, SenExMode::SenEx3, 1, v);
    ASSERT_EQ(set.skipped.size(), 1u);
    EXPECT_EQ(set.skipped[0].id, "c");
    EXPECT_EQ(set.documents.size(), 3u);
}

TEST_F(SenEx, Mode3HintIsOrderPreservingSubsequence) {
    const auto& v = factsum::testing::any_vocab();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (const auto& d : build_senex_dataset(docs, SenExMode::SenEx3, seed, v).documents) {
            const auto tokens = encode(v, d.target);
            const auto ids = d.extra["hint_token_ids"].get<std::vector<TokenId>>();
            ASSERT_EQ(ids.size(), 3u);
            const bool found = oracle::ordered_triple_in(tokens, ids, *d.prompt);
            EXPECT_TRUE(found) << d.id << " seed " << seed;
        }
    }
}

TEST_F(SenEx, FixedSeedIsBitIdentical) {
    const auto& v = factsum::testing::any_vocab();
    auto dump = [&](std::uint64_t seed) {
        std::string out;
        for (const auto& d : build_senex_dataset(docs, SenExMode::SenEx3, seed, v).documents)
            out += *d.prompt + "|" + d.extra.dump() + "\n";
        return out;
    };
    EXPECT_EQ(dump(42), dump(42));
    bool differs = false;
    for (std::uint64_t s = 0; s < 10 && !differs; ++s) differs = dump(42) != dump(s + 100);
    EXPECT_TRUE(differs);
}

TEST(ParseSenExMode, Names) {
    EXPECT_EQ(parse_senex_mode("SenEx2"), SenExMode::SenEx2);
    EXPECT_EQ(parse_senex_mode("3"), SenExMode::SenEx3);
    EXPECT_THROW(parse_senex_mode("senex4"), UsageError);
}

TEST(LengthFilter, BoundaryAt800Words) {
    const std::vector<Document> docs = {doc("keep", n_words(700), n_words(100)),
                                        doc("drop", n_words(750), n_words(100))};
    const auto r = filter_by_length(docs);
    ASSERT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.kept[0].id, "keep");
    EXPECT_EQ(r.dropped, std::vector<std::string>{"drop"});
}

TEST(LengthFilter, PromptIsCountedWhenRequested) {
    auto d = doc("p", n_words(700), n_words(100));
    d.prompt = n_words(60, "hint");
    const std::vector<Document> docs = {d};
    EXPECT_EQ(document_length(d, false), 800u);
    EXPECT_EQ(document_length(d, true), 860u);
    EXPECT_EQ(filter_by_length(docs, 800, false).kept.size(), 1u);
    EXPECT_EQ(filter_by_length(docs, 800, true).dropped, std::vector<std::string>{"p"});
}

TEST(LengthFilter, BpeMeasure) {
    const auto& v = factsum::testing::any_vocab();
    const LengthMeasure bpe{&v};
    const auto d = doc("x", "the the the", "the");
    EXPECT_EQ(document_length(d, false, bpe), encode(v, d.source).size() + encode(v, d.target).size());
}
