#pragma once

// Shared fixtures: resource paths, vocabularies and a seeded synthetic
// news-like corpus with entity-swapped summaries.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "factsum/harness.hpp"

namespace factsum::testing {

inline std::string data_path(const std::string& rel) { return std::string(FACTSUM_DATA_DIR) + "/" + rel; }
inline std::string fixture_path(const std::string& rel) { return std::string(FACTSUM_FIXTURE_DIR) + "/" + rel; }

inline bool have_gpt2() {
    return std::filesystem::exists(data_path("gpt2/encoder.json")) && std::filesystem::exists(data_path("gpt2/vocab.bpe"));
}

inline const Vocabulary& gpt2() {
    static const Vocabulary v = load_vocabulary(data_path("gpt2/encoder.json"), data_path("gpt2/vocab.bpe"));
    return v;
}

inline const Vocabulary& tiny() {
    static const Vocabulary v = load_vocabulary(fixture_path("tiny_vocab.json"), fixture_path("tiny_merges.txt"));
    return v;
}

// GPT-2 when its files are present, else the 500-token fixture.
inline const Vocabulary& any_vocab() { return have_gpt2() ? gpt2() : tiny(); }

inline const Annotator& annotator() {
    static const Annotator a{Lexicon::load(data_path("lexicon.tsv")), Gazetteer::load(data_path("gazetteer.tsv"))};
    return a;
}

// Same score for a token whatever the context.
class ContextFreeScorer final : public Scorer {
public:
    explicit ContextFreeScorer(const Vocabulary& vocab) : vocab_(&vocab) {}

    ScoreResponse score(const ScoreRequest& r) const override {
        ScoreResponse out;
        out.model_id = model_id();
        for (const auto& t : encode(*vocab_, r.target)) {
            out.tokens.push_back(t.text);
            out.logprobs.push_back(-1.0 - 0.25 * static_cast<double>(t.text.size()) - 0.001 * (t.id % 97));
        }
        return out;
    }

    std::string model_id() const override { return "context-free"; }

private:
    const Vocabulary* vocab_;
};

struct SyntheticDoc {
    Document doc;
    std::string copied;  // equals the target
    std::string swapped; // target with one entity replaced by one absent from the source
};

namespace synthetic_detail {

inline const std::vector<std::string> kPeople = {"Joe Biden",     "Barack Obama",   "Donald Trump", "Sally Forrest",
                                                 "Prince Harry",  "Angela Merkel",  "Emmanuel Macron",
                                                 "Roy Hodgson",   "Wayne Rooney",   "Lionel Messi", "Theresa May"};
inline const std::vector<std::string> kPlaces = {"Hawaii", "London", "Paris",      "Washington", "California",
                                                 "Berlin", "Madrid", "Basingstoke", "Manchester", "Hampshire"};
inline const std::vector<std::string> kCountries = {"England", "France", "Germany", "Spain",
                                                    "Italy",   "China",  "Russia",  "Japan"};
inline const std::vector<std::string> kOrgs = {"Google", "Apple", "Microsoft", "BBC", "NASA", "Chelsea", "Arsenal"};
inline const std::vector<std::string> kMonths = {"January", "March", "April", "June", "July", "October"};

inline const std::vector<std::string> kFillers = {
    "Officials said the decision was final.",
    "The report was published on Monday.",
    "Police said the investigation was continuing.",
    "The club said the new stadium would open next year.",
    "Local people gathered outside the court.",
    "The company said profits rose sharply.",
    "Critics said the plan was too expensive.",
    "The team won the match in extra time.",
    "A spokesman declined to comment on the case.",
    "The minister said the government would review the rules.",
    "Thousands of fans watched the game.",
    "The weather was cold and wet all week.",
    "Several witnesses described the scene.",
    "The family thanked the doctors for their work.",
    "Prices rose for the third month in a row.",
};

inline const std::string& pick(SeededRng& rng, const std::vector<std::string>& pool) {
    return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

inline bool shares_word(const std::string& candidate, const std::string& text) {
    for (const auto& w : tokenize_words(candidate))
        for (const auto& v : tokenize_words(text))
            if (detail::to_lower(w.text) == detail::to_lower(v.text)) return true;
    return false;
}

// A replacement from `pool` none of whose words occur in `source`.
inline std::string absent_from(SeededRng& rng, const std::vector<std::string>& pool, const std::string& source) {
    for (int tries = 0; tries < 1000; ++tries) {
        const auto& c = pick(rng, pool);
        if (!shares_word(c, source)) return c;
    }
    return "Zanzibar Quill";
}

} // namespace synthetic_detail

inline std::vector<SyntheticDoc> synthetic_corpus(std::size_t n, std::uint64_t seed) {
    using namespace synthetic_detail;
    SeededRng rng(seed);
    std::vector<SyntheticDoc> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto person = pick(rng, kPeople);
        std::string other = pick(rng, kPeople);
        while (other == person) other = pick(rng, kPeople);
        const auto place = pick(rng, kPlaces);
        const auto country = pick(rng, kCountries);
        const auto org = pick(rng, kOrgs);
        const auto day = std::to_string(1 + rng.below(28));
        const auto month = pick(rng, kMonths);

        std::string key;
        std::string entity; // the entity a swap replaces
        const std::vector<std::string>* pool = &kPeople;
        switch (rng.below(5)) {
        case 0: key = person + " was born in " + place + "."; entity = person; break;
        case 1: key = person + " died on " + month + " " + day + "."; entity = person; break;
        case 2: key = org + " has hired " + person + "."; entity = person; break;
        case 3: key = person + " visited " + country + " on " + month + " " + day + "."; entity = country; pool = &kCountries; break;
        default: key = person + " met " + other + " in " + place + "."; entity = place; pool = &kPlaces; break;
        }

        std::vector<std::string> sentences;
        const auto fillers = 2 + rng.below(5);
        const auto key_at = rng.below(fillers + 1);
        for (std::uint64_t f = 0; f <= fillers; ++f) {
            if (f == key_at) sentences.push_back(key);
            else sentences.push_back(pick(rng, kFillers));
        }
        std::string source;
        for (const auto& s : sentences) source += (source.empty() ? "" : " ") + s;

        SyntheticDoc d;
        d.doc.id = "doc" + std::to_string(i);
        d.doc.source = source;
        d.doc.target = key;
        d.copied = key;
        const auto replacement = absent_from(rng, *pool, source);
        d.swapped = key;
        d.swapped.replace(d.swapped.find(entity), entity.size(), replacement);
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace factsum::testing
