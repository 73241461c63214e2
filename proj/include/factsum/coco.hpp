#pragma once

// Keyword-masking counterfactual score: how much the scorer's belief in a
// summary's keywords drops when those keywords are masked out of the source.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "factsum/annotate.hpp"
#include "factsum/bpe.hpp"
#include "factsum/detail/text.hpp"
#include "factsum/errors.hpp"
#include "factsum/scorer.hpp"

namespace factsum {

struct MaskedSpan {
    std::string word;              // original bytes
    std::size_t source_offset = 0; // where the word starts in the source
    std::size_t masked_offset = 0; // where its mask starts in the masked text
};

struct MaskedDocument {
    std::string text;
    std::vector<MaskedSpan> masked_spans;
    std::string mask_token{kMaskToken};
};

// Every whole-word, case-insensitive occurrence of a keyword is replaced by
// the mask token. Surrounding bytes are untouched.
inline MaskedDocument build_masked_document(std::string_view source, std::span<const WordSpan> keywords,
                                            std::string_view mask_token = kMaskToken) {
    std::unordered_set<std::string> wanted;
    for (const auto& k : keywords) wanted.insert(detail::to_lower(k.text));

    MaskedDocument out;
    out.mask_token = std::string(mask_token);
    std::size_t copied = 0;
    for (const auto& w : tokenize_words(source)) {
        if (!wanted.contains(detail::to_lower(w.text))) continue;
        out.text.append(source.substr(copied, w.start - copied));
        out.masked_spans.push_back({w.text, w.start, out.text.size()});
        out.text += mask_token;
        copied = w.end;
    }
    out.text.append(source.substr(copied));
    return out;
}

inline std::string unmask(const MaskedDocument& m) {
    std::string out;
    std::size_t copied = 0;
    for (const auto& s : m.masked_spans) {
        if (s.masked_offset < copied || s.masked_offset + m.mask_token.size() > m.text.size() ||
            m.text.compare(s.masked_offset, m.mask_token.size(), m.mask_token) != 0)
            throw DataError("masked span at offset " + std::to_string(s.masked_offset) + " does not hold a mask");
        out.append(m.text, copied, s.masked_offset - copied);
        out += s.word;
        copied = s.masked_offset + m.mask_token.size();
    }
    out.append(m.text, copied);
    return out;
}

struct PositionalScores {
    std::vector<std::string> tokens;
    std::vector<ByteSpan> spans; // into the summary
    std::vector<double> logprobs;
    std::string model_id;
};

// Scores `summary` given `context` and aligns the returned tokens to the
// summary's bytes. The backend's tokens must concatenate to the summary.
inline PositionalScores positional_scores(const Scorer& scorer, std::string_view context, std::string_view summary) {
    auto r = scorer.score({std::string(context), std::string(summary)});
    validate_response(r, false);
    PositionalScores out{std::move(r.tokens), {}, std::move(r.logprobs), std::move(r.model_id)};
    std::size_t pos = 0;
    for (const auto& t : out.tokens) {
        if (summary.substr(pos, t.size()) != t)
            throw ProtocolError("scorer tokens do not spell the summary at byte " + std::to_string(pos));
        out.spans.push_back({pos, pos + t.size()});
        pos += t.size();
    }
    if (pos != summary.size())
        throw ProtocolError("scorer tokens cover " + std::to_string(pos) + " of " + std::to_string(summary.size()) +
                            " summary bytes");
    return out;
}

struct KeywordScore {
    std::string word;
    std::size_t word_offset = 0; // in the summary
    std::string first_token;
    std::size_t token_index = 0;
    double score_x = 0.0; // log-probability with the full source
    double score_m = 0.0; // log-probability with the masked source

    double delta() const { return score_x - score_m; }
};

struct CoCoResult {
    std::vector<KeywordScore> keywords;
    std::vector<std::string> dropped; // keywords whose first token could not be located
    std::size_t n = 0;
    double score_x_mean = 0.0;
    double score_m_mean = 0.0;
    double coco = 0.0;
    MaskedDocument masked;
    std::string model_id;
};

namespace coco_detail {

// Index of the token holding the keyword's first byte, allowing only
// whitespace between the token start and the keyword.
inline std::optional<std::size_t> locate(std::span<const ByteSpan> spans, std::string_view summary, std::size_t at) {
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].begin > at || at >= spans[i].end) continue;
        for (std::size_t b = spans[i].begin; b < at; ++b)
            if (!detail::is_ascii_space(summary[b])) return std::nullopt;
        return i;
    }
    return std::nullopt;
}

} // namespace coco_detail

// `keywords` are word spans into `summary`, one entry per occurrence.
inline CoCoResult coco_score(const Scorer& scorer, std::string_view source, std::string_view summary,
                             std::span<const WordSpan> keywords, std::string_view mask_token = kMaskToken) {
    if (keywords.empty()) throw NoKeywordsError("summary has no keywords under the chosen policy");

    CoCoResult out;
    out.masked = build_masked_document(source, keywords, mask_token);
    const auto px = positional_scores(scorer, source, summary);
    const auto pm = positional_scores(scorer, out.masked.text, summary);
    if (px.tokens != pm.tokens) throw ProtocolError("scorer tokenized the summary differently across contexts");
    out.model_id = px.model_id;

    double sum_x = 0.0;
    double sum_m = 0.0;
    for (const auto& k : keywords) {
        const auto i = coco_detail::locate(px.spans, summary, k.start);
        if (!i) {
            out.dropped.push_back(k.text);
            continue;
        }
        out.keywords.push_back({k.text, k.start, px.tokens[*i], *i, px.logprobs[*i], pm.logprobs[*i]});
        sum_x += px.logprobs[*i];
        sum_m += pm.logprobs[*i];
    }
    out.n = out.keywords.size();
    if (out.n == 0) throw NoKeywordsError("no keyword could be located in the scorer's tokens");
    const auto n = static_cast<double>(out.n);
    out.score_x_mean = sum_x / n;
    out.score_m_mean = sum_m / n;
    double sum_delta = 0.0;
    for (const auto& k : out.keywords) sum_delta += k.delta();
    out.coco = sum_delta / n;
    return out;
}

// Keywords are chosen from the annotated summary by `policy`.
inline CoCoResult coco_score(const Scorer& scorer, std::string_view source, std::string_view summary,
                             const KeywordPolicy& policy, const Annotator& annotator,
                             std::string_view mask_token = kMaskToken) {
    const auto annotations = annotator(summary);
    const auto keywords = select_keywords(annotations, policy);
    return coco_score(scorer, source, summary, keywords, mask_token);
}

} // namespace factsum
