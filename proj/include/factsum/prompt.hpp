#pragma once

// Discrete relation prompts, TL;DR inputs, sentence-extraction probe sets and
// the source+target length filter.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "factsum/bpe.hpp"
#include "factsum/detail/text.hpp"
#include "factsum/errors.hpp"
#include "factsum/openie.hpp"

namespace factsum {

inline constexpr std::string_view kRelationPrefix = "Key relation: ";
inline constexpr std::string_view kPromptSeparator = "\n";
inline constexpr std::string_view kTldrSuffix = "\nTL;DR:";

struct Document {
    std::string id;
    std::string source;
    std::string target;
    std::optional<std::string> prompt;              // line placed before source, if any
    nlohmann::json extra = nlohmann::json::object(); // fields this toolkit does not interpret

    // What a summariser is fed: prompt + separator + source.
    std::string input() const {
        if (!prompt) return source;
        std::string out = *prompt;
        out += kPromptSeparator;
        out += source;
        return out;
    }
};

struct PromptedDocument {
    std::string prompt;
    std::string modified_source;
    Document original;
    Triple relation;
};

// Python's repr() for str: single quotes unless the text contains a single
// quote and no double quote.
inline std::string python_repr(std::string_view s) {
    const bool has_single = s.find('\'') != std::string_view::npos;
    const bool has_double = s.find('"') != std::string_view::npos;
    const char quote = (has_single && !has_double) ? '"' : '\'';
    std::string out(1, quote);
    for (const char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (ch == '\\') out += "\\\\";
        else if (ch == quote) { out += '\\'; out += ch; }
        else if (ch == '\n') out += "\\n";
        else if (ch == '\r') out += "\\r";
        else if (ch == '\t') out += "\\t";
        else if (c < 0x20 || c == 0x7F) {
            static constexpr char kHex[] = "0123456789abcdef";
            out += "\\x";
            out += kHex[c >> 4];
            out += kHex[c & 0xF];
        } else {
            out += ch;
        }
    }
    out += quote;
    return out;
}

// Key relation: {'subject': ' S', 'relation': ' R', 'object': ' O'}
inline std::string serialize_relation(std::string_view subject, std::string_view relation, std::string_view object) {
    auto value = [](std::string_view v) { return python_repr(" " + std::string(v)); };
    std::string out(kRelationPrefix);
    out += "{'subject': " + value(subject);
    out += ", 'relation': " + value(relation);
    out += ", 'object': " + value(object) + "}";
    return out;
}

inline std::string serialize_relation(const Triple& t) {
    return serialize_relation(t.subject.text, t.relation.text, t.object.text);
}

inline PromptedDocument build_prompted_source(const Document& doc, const Triple& t) {
    PromptedDocument p{serialize_relation(t), {}, doc, t};
    p.modified_source = p.prompt + std::string(kPromptSeparator) + doc.source;
    return p;
}

// Inverse of build_prompted_source: drops everything through the first separator.
inline std::string strip_prompt(std::string_view modified_source) {
    const auto nl = modified_source.find(kPromptSeparator);
    if (nl == std::string_view::npos) throw DataError("no prompt line to strip");
    return std::string(modified_source.substr(nl + kPromptSeparator.size()));
}

inline std::string build_tldr_input(const Document& doc) {
    if (doc.source.empty()) throw DataError("document '" + doc.id + "' has an empty source");
    return doc.source + std::string(kTldrSuffix);
}

enum class SenExMode { SenEx1, SenEx2, SenEx3 };

inline std::string_view to_string(SenExMode m) {
    switch (m) {
    case SenExMode::SenEx1: return "senex1";
    case SenExMode::SenEx2: return "senex2";
    case SenExMode::SenEx3: return "senex3";
    }
    return "?";
}

inline SenExMode parse_senex_mode(std::string_view s) {
    const auto lower = detail::to_lower(s);
    if (lower == "senex1" || lower == "1") return SenExMode::SenEx1;
    if (lower == "senex2" || lower == "2") return SenExMode::SenEx2;
    if (lower == "senex3" || lower == "3") return SenExMode::SenEx3;
    throw UsageError("unknown SenEx mode '" + std::string(s) + "'");
}

// splitmix64; small, fully specified, so seeded output is identical on every platform.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound), by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        for (;;) {
            const auto x = next();
            if (x < limit) return x % bound;
        }
    }

private:
    std::uint64_t state_;
};

// `count` distinct indices from [0, n), uniformly, returned in ascending order.
inline std::vector<std::size_t> sample_ordered(SeededRng& rng, std::size_t n, std::size_t count) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct SkipRecord {
    std::string id;
    std::string reason;
};

struct SenExDataset {
    std::vector<Document> documents;
    std::vector<SkipRecord> skipped;
};

inline constexpr std::size_t kSenExHintTokens = 3;

// Target := first sentence of the source. SenEx2 prepends its first three
// BPE tokens, SenEx3 three tokens drawn without replacement (original order
// kept). Hint token ids and positions are recorded in `extra`.
inline SenExDataset build_senex_dataset(std::span<const Document> docs, SenExMode mode, std::uint64_t seed,
                                        const Vocabulary& vocab,
                                        const std::set<std::string>& abbreviations = default_abbreviations()) {
    SenExDataset out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& doc = docs[i];
        const auto sentences = split_sentences(doc.source, abbreviations);
        std::string target;
        if (!sentences.empty())
            target = std::string(detail::trim(std::string_view(doc.source).substr(sentences[0].begin, sentences[0].size())));
        if (target.empty()) {
            out.skipped.push_back({doc.id, "source has no sentence"});
            continue;
        }
        Document rec{doc.id, doc.source, target, std::nullopt, doc.extra};
        rec.extra["senex_mode"] = std::string(to_string(mode));
        if (mode != SenExMode::SenEx1) {
            const auto tokens = encode(vocab, target);
            if (tokens.size() < kSenExHintTokens) {
                out.skipped.push_back({doc.id, "target sentence has " + std::to_string(tokens.size()) +
                                                   " BPE tokens, need " + std::to_string(kSenExHintTokens)});
                continue;
            }
            std::vector<std::size_t> positions;
            if (mode == SenExMode::SenEx2) {
                positions = {0, 1, 2};
            } else {
                SeededRng rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1)));
                positions = sample_ordered(rng, tokens.size(), kSenExHintTokens);
            }
            std::string hint;
            auto ids = nlohmann::json::array();
            for (const auto p : positions) {
                hint += tokens[p].text;
                ids.push_back(tokens[p].id);
            }
            rec.prompt = hint;
            rec.extra["hint_token_ids"] = ids;
            rec.extra["hint_token_positions"] = positions;
        }
        out.documents.push_back(std::move(rec));
    }
    return out;
}

// Word counts by default (whitespace-separated), or BPE tokens when a
// vocabulary is supplied.
struct LengthMeasure {
    const Vocabulary* vocab = nullptr;

    std::size_t operator()(std::string_view s) const {
        return vocab ? encode(*vocab, s).size() : detail::count_words(s);
    }
};

inline std::size_t document_length(const Document& doc, bool with_prompt, const LengthMeasure& measure = {}) {
    const std::size_t src = with_prompt ? measure(doc.input()) : measure(doc.source);
    return src + measure(doc.target);
}

struct LengthFilterResult {
    std::vector<Document> kept;
    std::vector<std::string> dropped;
};

inline constexpr std::size_t kDefaultLengthLimit = 800;

// Keeps documents whose source (with its prompt when `with_prompt`) plus
// target length is at most `limit`. Order is preserved.
inline LengthFilterResult filter_by_length(std::span<const Document> docs, std::size_t limit = kDefaultLengthLimit,
                                           bool with_prompt = false, const LengthMeasure& measure = {}) {
    LengthFilterResult out;
    for (const auto& d : docs) {
        if (document_length(d, with_prompt, measure) <= limit) out.kept.push_back(d);
        else out.dropped.push_back(d.id);
    }
    return out;
}

} // namespace factsum
