#pragma once

// Surface-pattern open information extraction.
//
// Grammar over POS tags, one triple per maximal relation span:
//   relation := VERB (VERB | PART | ADP | ADV)*          (maximal)
//   np       := DET? ADJ* (NOUN | NUM)+  |  PRON
//   subject  := longest np ending right before the relation
//   object   := longest of { np, same-tag NER run } starting right after it

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factsum/annotate.hpp"
#include "factsum/bpe.hpp"

namespace factsum {

inline const std::set<std::string>& default_abbreviations() {
    static const std::set<std::string> abbr = {
        "Mr.",   "Mrs.", "Ms.",  "Dr.",  "Prof.", "St.",  "Jr.",  "Sr.",  "vs.",  "etc.", "e.g.", "i.e.",
        "U.S.",  "U.K.", "Inc.", "Ltd.", "Co.",   "Corp.", "Gen.", "Sen.", "Rep.", "Gov.", "Capt.", "Lt.",
        "Col.",  "Sgt.", "No.",  "Jan.", "Feb.", "Mar.",  "Apr.", "Jun.", "Jul.", "Aug.", "Sep.", "Sept.",
        "Oct.",  "Nov.", "Dec.", "Mt.",  "Ft.",  "a.m.",  "p.m."};
    return abbr;
}

// Contiguous sentence spans covering `text`; trailing whitespace belongs to
// the sentence it follows. A '.', '!' or '?' run (plus closing quotes or
// brackets) ends a sentence when followed by whitespace or end of text,
// unless the word it ends is in `abbreviations`.
inline std::vector<ByteSpan> split_sentences(std::string_view text,
                                             const std::set<std::string>& abbreviations = default_abbreviations()) {
    std::vector<ByteSpan> out;
    const std::size_t n = text.size();
    std::size_t start = 0;
    std::size_t pos = 0;
    auto is_terminator = [](char c) { return c == '.' || c == '!' || c == '?'; };
    auto is_closer = [](char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; };
    while (pos < n) {
        if (!is_terminator(text[pos])) {
            ++pos;
            continue;
        }
        const std::size_t term = pos;
        while (pos < n && is_terminator(text[pos])) ++pos;
        while (pos < n && is_closer(text[pos])) ++pos;
        // Curly closing quotes.
        while (text.substr(pos, 3) == "\xE2\x80\x9D" || text.substr(pos, 3) == "\xE2\x80\x99") pos += 3;
        if (pos < n && !detail::is_ascii_space(text[pos])) continue;

        std::size_t word_begin = term;
        while (word_begin > start && !detail::is_ascii_space(text[word_begin - 1])) --word_begin;
        const auto word = text.substr(word_begin, term + 1 - word_begin);
        if (text[term] == '.' && abbreviations.contains(std::string(word))) continue;

        while (pos < n && detail::is_ascii_space(text[pos])) ++pos;
        out.push_back({start, pos});
        start = pos;
    }
    if (start < n) out.push_back({start, n});
    return out;
}

struct Argument {
    std::string text;
    std::size_t first_word = 0; // global word indices, half-open
    std::size_t end_word = 0;
    ByteSpan bytes;

    std::size_t word_count() const { return end_word - first_word; }
    bool operator==(const Argument&) const = default;
};

struct Triple {
    Argument subject;
    Argument relation;
    Argument object;
    std::size_t sentence_index = 0;
    double score = 0.0;

    bool operator==(const Triple&) const = default;
};

namespace openie_detail {

inline bool is_nominal(PosTag t) { return t == PosTag::Noun || t == PosTag::Num; }
inline bool continues_relation(PosTag t) {
    return t == PosTag::Verb || t == PosTag::Part || t == PosTag::Adp || t == PosTag::Adv;
}

// Start of the longest np ending at `end` (exclusive), if any.
inline std::optional<std::size_t> np_ending_at(std::span<const Annotation> s, std::size_t end) {
    if (end == 0) return std::nullopt;
    if (s[end - 1].pos == PosTag::Pron) return end - 1;
    std::size_t k = end;
    while (k > 0 && is_nominal(s[k - 1].pos)) --k;
    if (k == end) return std::nullopt;
    while (k > 0 && s[k - 1].pos == PosTag::Adj) --k;
    if (k > 0 && s[k - 1].pos == PosTag::Det) --k;
    return k;
}

// End of the longest np starting at `begin`, if any.
inline std::optional<std::size_t> np_starting_at(std::span<const Annotation> s, std::size_t begin) {
    if (begin >= s.size()) return std::nullopt;
    if (s[begin].pos == PosTag::Pron) return begin + 1;
    std::size_t k = begin;
    if (s[k].pos == PosTag::Det) ++k;
    while (k < s.size() && s[k].pos == PosTag::Adj) ++k;
    const std::size_t nominal_start = k;
    while (k < s.size() && is_nominal(s[k].pos)) ++k;
    if (k == nominal_start) return std::nullopt;
    return k;
}

inline std::optional<std::size_t> entity_starting_at(std::span<const Annotation> s, std::size_t begin) {
    if (begin >= s.size() || s[begin].ner == NerTag::None) return std::nullopt;
    std::size_t k = begin + 1;
    while (k < s.size() && s[k].ner == s[begin].ner) ++k;
    return k;
}

inline Argument make_argument(std::span<const Annotation> s, std::size_t b, std::size_t e, std::string_view text) {
    const ByteSpan bytes{s[b].word.start, s[e - 1].word.end};
    return Argument{std::string(text.substr(bytes.begin, bytes.size())), s[b].word.index, s[e - 1].word.index + 1,
                    bytes};
}

} // namespace openie_detail

// `sentence` is the POS/NER-annotated words of one sentence; their byte
// offsets index into `text`.
inline std::vector<Triple> extract_triples(std::span<const Annotation> sentence, std::string_view text,
                                           std::size_t sentence_index = 0) {
    using namespace openie_detail;
    std::vector<Triple> out;
    const std::size_t n = sentence.size();
    std::size_t k = 0;
    while (k < n) {
        if (!continues_relation(sentence[k].pos)) {
            ++k;
            continue;
        }
        const std::size_t run_begin = k;
        while (k < n && continues_relation(sentence[k].pos)) ++k;
        std::size_t rel_begin = run_begin;
        while (rel_begin < k && sentence[rel_begin].pos != PosTag::Verb) ++rel_begin;
        if (rel_begin == k) continue;
        const std::size_t rel_end = k;

        const auto subj_begin = np_ending_at(sentence, rel_begin);
        if (!subj_begin) continue;
        const auto np_end = np_starting_at(sentence, rel_end);
        const auto ent_end = entity_starting_at(sentence, rel_end);
        if (!np_end && !ent_end) continue;
        const std::size_t obj_end = std::max(np_end.value_or(0), ent_end.value_or(0));

        const auto rel_words = static_cast<double>(rel_end - rel_begin);
        out.push_back(Triple{make_argument(sentence, *subj_begin, rel_begin, text),
                             make_argument(sentence, rel_begin, rel_end, text),
                             make_argument(sentence, rel_end, obj_end, text), sentence_index,
                             rel_words / (rel_words + 1.0)});
    }
    return out;
}

// Keeps triples whose subject or object has a word tagged with a whitelisted
// entity type. `annotations` is indexed by global word index.
inline std::vector<Triple> filter_triples(std::span<const Triple> triples, const std::set<NerTag>& whitelist,
                                          std::span<const Annotation> annotations) {
    std::vector<Triple> out;
    auto has_entity = [&](const Argument& a) {
        for (std::size_t w = a.first_word; w < a.end_word && w < annotations.size(); ++w)
            if (whitelist.contains(annotations[w].ner)) return true;
        return false;
    };
    for (const auto& t : triples)
        if (has_entity(t.subject) || has_entity(t.object)) out.push_back(t);
    return out;
}

// Highest score; ties go to the earliest sentence, then the longest object,
// then the earliest position.
inline std::optional<Triple> select_key_relation(std::span<const Triple> triples) {
    if (triples.empty()) return std::nullopt;
    auto better = [](const Triple& a, const Triple& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.sentence_index != b.sentence_index) return a.sentence_index < b.sentence_index;
        if (a.object.word_count() != b.object.word_count()) return a.object.word_count() > b.object.word_count();
        if (a.object.bytes.size() != b.object.bytes.size()) return a.object.bytes.size() > b.object.bytes.size();
        return a.relation.bytes.begin < b.relation.bytes.begin;
    };
    return *std::min_element(triples.begin(), triples.end(), [&](const Triple& a, const Triple& b) { return better(a, b); });
}

struct DocumentExtraction {
    std::vector<Annotation> annotations;
    std::vector<ByteSpan> sentences;
    std::vector<Triple> triples;
};

// Sentence split, annotate and extract over a whole text.
inline DocumentExtraction extract_document(std::string_view text, const Annotator& annotator,
                                           const std::set<std::string>& abbreviations = default_abbreviations()) {
    DocumentExtraction doc;
    doc.annotations = annotator(text);
    doc.sentences = split_sentences(text, abbreviations);
    std::size_t w = 0;
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
        const std::size_t first = w;
        while (w < doc.annotations.size() && doc.annotations[w].word.start < doc.sentences[s].end) ++w;
        const std::span<const Annotation> words(doc.annotations.data() + first, w - first);
        for (auto& t : extract_triples(words, text, s)) doc.triples.push_back(std::move(t));
    }
    return doc;
}

} // namespace factsum
