#pragma once

// Word tokenization, lexicon/suffix POS tagging and gazetteer NER.
// Deterministic stand-ins for trained taggers; tag inventories are the
// minimal sets the keyword policies and relation filters need.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "factsum/detail/text.hpp"
#include "factsum/detail/unicode.hpp"
#include "factsum/errors.hpp"

namespace factsum {

enum class PosTag : std::uint8_t { Noun, Pron, Verb, Adj, Adv, Adp, Det, Num, Punct, Part, Conj, X };
enum class NerTag : std::uint8_t { Person, Title, Country, Org, Loc, Date, None };

inline constexpr std::array<std::string_view, 12> kPosNames = {"NOUN", "PRON", "VERB", "ADJ",   "ADV",  "ADP",
                                                               "DET",  "NUM",  "PUNCT", "PART", "CONJ", "X"};
inline constexpr std::array<std::string_view, 7> kNerNames = {"PERSON", "TITLE", "COUNTRY", "ORG",
                                                              "LOC",    "DATE",  "NONE"};

inline std::string_view to_string(PosTag t) { return kPosNames[static_cast<std::size_t>(t)]; }
inline std::string_view to_string(NerTag t) { return kNerNames[static_cast<std::size_t>(t)]; }

inline std::optional<PosTag> parse_pos_tag(std::string_view s) {
    for (std::size_t i = 0; i < kPosNames.size(); ++i)
        if (kPosNames[i] == s) return static_cast<PosTag>(i);
    return std::nullopt;
}

inline std::optional<NerTag> parse_ner_tag(std::string_view s) {
    for (std::size_t i = 0; i < kNerNames.size(); ++i)
        if (kNerNames[i] == s) return static_cast<NerTag>(i);
    return std::nullopt;
}

struct WordSpan {
    std::string text;
    std::size_t start = 0; // byte offsets into the annotated text
    std::size_t end = 0;
    std::size_t index = 0; // word position
    bool operator==(const WordSpan&) const = default;
};

struct Annotation {
    WordSpan word;
    PosTag pos = PosTag::X;
    NerTag ner = NerTag::None;
};

namespace annotate_detail {

inline bool is_apostrophe_at(std::string_view s, std::size_t pos, std::size_t* len) {
    if (pos < s.size() && s[pos] == '\'') {
        *len = 1;
        return true;
    }
    if (s.substr(pos, 3) == "\xE2\x80\x99") { // U+2019
        *len = 3;
        return true;
    }
    return false;
}

// Clitic suffixes split off as their own words, Penn-Treebank style.
inline std::size_t clitic_length(std::string_view word) {
    const auto lower = detail::to_lower(word);
    for (std::string_view c : {"n't", "n\xE2\x80\x99t"}) {
        if (lower.size() > c.size() && std::string_view(lower).ends_with(c)) return c.size();
    }
    for (std::string_view apos : {"'", "\xE2\x80\x99"}) {
        for (std::string_view tail : {"s", "re", "ve", "ll", "d", "m"}) {
            const std::string clitic = std::string(apos) + std::string(tail);
            if (lower.size() > clitic.size() && std::string_view(lower).ends_with(clitic)) return clitic.size();
        }
    }
    return 0;
}

inline bool is_clitic(std::string_view word) {
    const auto lower = detail::to_lower(word);
    for (std::string_view apos : {"'", "\xE2\x80\x99"}) {
        for (std::string_view tail : {"s", "re", "ve", "ll", "d", "m", "t"}) {
            if (lower == std::string(apos) + std::string(tail)) return true;
        }
    }
    return false;
}

} // namespace annotate_detail

// Splits on whitespace and detaches punctuation, one span per punctuation
// character. Hyphens and apostrophes between letters stay inside a word,
// as do '.' and ',' between digits; clitics ('s, n't, ...) become words.
inline std::vector<WordSpan> tokenize_words(std::string_view text) {
    std::vector<WordSpan> words;
    const std::size_t n = text.size();
    auto cp_at = [&](std::size_t pos) { return detail::decode_utf8(text, pos); };
    auto is_word_cp = [](std::int32_t c) { return detail::is_letter(c) || detail::is_number(c) || detail::is_mark(c); };
    auto word_char_at = [&](std::size_t pos) { return pos < n && is_word_cp(cp_at(pos).value); };
    auto push = [&](std::size_t b, std::size_t e) {
        words.push_back(WordSpan{std::string(text.substr(b, e - b)), b, e, words.size()});
    };

    std::size_t pos = 0;
    while (pos < n) {
        const auto cp = cp_at(pos);
        if (detail::is_space(cp.value)) {
            pos += cp.length;
            continue;
        }
        if (is_word_cp(cp.value)) {
            const std::size_t start = pos;
            pos += cp.length;
            while (pos < n) {
                const auto c = cp_at(pos);
                if (is_word_cp(c.value)) {
                    pos += c.length;
                    continue;
                }
                std::size_t alen = 0;
                const bool connector = text[pos] == '-' || annotate_detail::is_apostrophe_at(text, pos, &alen);
                const std::size_t clen = alen ? alen : 1;
                if (connector && word_char_at(pos + clen)) {
                    pos += clen;
                    continue;
                }
                const bool numeric_sep = (text[pos] == '.' || text[pos] == ',') && pos > start &&
                                         detail::is_ascii_digit(text[pos - 1]) && pos + 1 < n &&
                                         detail::is_ascii_digit(text[pos + 1]);
                if (numeric_sep) {
                    pos += 1;
                    continue;
                }
                break;
            }
            const auto clitic = annotate_detail::clitic_length(text.substr(start, pos - start));
            if (clitic) {
                push(start, pos - clitic);
                push(pos - clitic, pos);
            } else {
                push(start, pos);
            }
            continue;
        }
        // Standalone clitic such as the "'s" in "England 's".
        std::size_t alen = 0;
        if (annotate_detail::is_apostrophe_at(text, pos, &alen)) {
            std::size_t e = pos + alen;
            while (e < n && detail::is_ascii_alnum(text[e])) ++e;
            if (e > pos + alen && !word_char_at(e) && annotate_detail::is_clitic(text.substr(pos, e - pos))) {
                push(pos, e);
                pos = e;
                continue;
            }
        }
        push(pos, pos + cp.length);
        pos += cp.length;
    }
    return words;
}

// surface<TAB>TAG lines; '#' starts a comment line.
template <typename Tag, typename ParseFn>
std::vector<std::pair<std::string, Tag>> parse_tag_table(std::string_view text, const std::string& name, ParseFn parse) {
    std::vector<std::pair<std::string, Tag>> rows;
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (detail::trim(line).empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw ParseError(name, i + 1, "expected surface<TAB>TAG");
        const auto surface = line.substr(0, tab);
        const auto tag_text = detail::trim(line.substr(tab + 1));
        if (surface.empty()) throw ParseError(name, i + 1, "empty surface form");
        const std::optional<Tag> tag = parse(tag_text);
        if (!tag) throw ParseError(name, i + 1, "unknown tag '" + std::string(tag_text) + "'");
        rows.emplace_back(std::string(surface), *tag);
    }
    return rows;
}

// Case-insensitive word -> POS lexicon.
class Lexicon {
public:
    static Lexicon from_string(std::string_view tsv, const std::string& name = "<lexicon>") {
        Lexicon lex;
        for (auto& [surface, tag] : parse_tag_table<PosTag>(tsv, name, parse_pos_tag)) lex.add(surface, tag);
        return lex;
    }

    static Lexicon load(const std::string& path) { return from_string(detail::read_file(path), path); }

    void add(std::string_view surface, PosTag tag) { entries_[detail::to_lower(surface)] = tag; }

    std::optional<PosTag> lookup(std::string_view word) const {
        if (auto it = entries_.find(detail::to_lower(word)); it != entries_.end()) return it->second;
        return std::nullopt;
    }

    std::size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, PosTag> entries_;
};

class Gazetteer {
public:
    explicit Gazetteer(bool case_sensitive = true) : case_sensitive_(case_sensitive) {}

    static Gazetteer from_string(std::string_view tsv, bool case_sensitive = true,
                                 const std::string& name = "<gazetteer>") {
        Gazetteer g(case_sensitive);
        auto parse = [](std::string_view s) -> std::optional<NerTag> {
            auto t = parse_ner_tag(s);
            if (t == NerTag::None) return std::nullopt;
            return t;
        };
        for (auto& [surface, tag] : parse_tag_table<NerTag>(tsv, name, parse)) g.add(surface, tag);
        return g;
    }

    static Gazetteer load(const std::string& path, bool case_sensitive = true) {
        return from_string(detail::read_file(path), case_sensitive, path);
    }

    void add(std::string_view surface, NerTag tag) {
        Entry e;
        for (auto& w : tokenize_words(surface)) e.words.push_back(key(w.text));
        if (e.words.empty()) throw DataError("gazetteer surface form has no words: '" + std::string(surface) + "'");
        e.tag = tag;
        auto& bucket = by_first_word_[e.words.front()];
        // Re-adding a surface form replaces its tag.
        auto same = std::find_if(bucket.begin(), bucket.end(), [&](const Entry& x) { return x.words == e.words; });
        if (same != bucket.end()) {
            same->tag = tag;
            return;
        }
        bucket.push_back(std::move(e));
        std::stable_sort(bucket.begin(), bucket.end(),
                         [](const Entry& a, const Entry& b) { return a.words.size() > b.words.size(); });
        ++size_;
    }

    bool case_sensitive() const { return case_sensitive_; }
    std::size_t size() const { return size_; }

    struct Match {
        std::size_t length;
        NerTag tag;
    };

    // Longest entry starting at words[at], if any.
    std::optional<Match> longest_match(std::span<const WordSpan> words, std::size_t at) const {
        auto it = by_first_word_.find(key(words[at].text));
        if (it == by_first_word_.end()) return std::nullopt;
        for (const auto& e : it->second) {
            if (at + e.words.size() > words.size()) continue;
            bool ok = true;
            for (std::size_t k = 1; k < e.words.size() && ok; ++k) ok = key(words[at + k].text) == e.words[k];
            if (ok) return Match{e.words.size(), e.tag};
        }
        return std::nullopt;
    }

private:
    struct Entry {
        std::vector<std::string> words;
        NerTag tag = NerTag::None;
    };

    std::string key(std::string_view w) const { return case_sensitive_ ? std::string(w) : detail::to_lower(w); }

    bool case_sensitive_;
    std::unordered_map<std::string, std::vector<Entry>> by_first_word_;
    std::size_t size_ = 0;
};

namespace annotate_detail {

inline bool has_alnum(std::string_view w) {
    std::size_t pos = 0;
    while (pos < w.size()) {
        const auto cp = detail::decode_utf8(w, pos);
        if (detail::is_letter(cp.value) || detail::is_number(cp.value)) return true;
        pos += cp.length;
    }
    return false;
}

inline bool is_numeric(std::string_view w) {
    bool digit = false;
    for (const char c : w) {
        if (detail::is_ascii_digit(c)) digit = true;
        else if (c != ',' && c != '.') return false;
    }
    return digit;
}

} // namespace annotate_detail

inline PosTag tag_word(std::string_view word, const Lexicon& lexicon) {
    if (!annotate_detail::has_alnum(word)) return PosTag::Punct;
    if (auto t = lexicon.lookup(word)) return *t;
    if (annotate_detail::is_numeric(word)) return PosTag::Num;
    const auto lower = detail::to_lower(word);
    const std::string_view w(lower);
    if (w.size() >= 5 && w.ends_with("ing")) return PosTag::Verb;
    if (w.size() >= 4 && w.ends_with("ed")) return PosTag::Verb;
    if (w.size() >= 4 && w.ends_with("ly")) return PosTag::Adv;
    return PosTag::Noun;
}

// Lexicon first, then suffix rules (-ing/-ed -> VERB, -ly -> ADV), default NOUN.
// NER is left as NONE.
inline std::vector<Annotation> pos_tag(std::span<const WordSpan> words, const Lexicon& lexicon) {
    std::vector<Annotation> out;
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(Annotation{w, tag_word(w.text, lexicon), NerTag::None});
    return out;
}

// Greedy left to right: at each word the longest gazetteer entry wins and
// every word it covers shares the tag.
inline std::vector<NerTag> ner_tag(std::span<const WordSpan> words, const Gazetteer& gazetteer) {
    std::vector<NerTag> tags(words.size(), NerTag::None);
    std::size_t i = 0;
    while (i < words.size()) {
        if (auto m = gazetteer.longest_match(words, i)) {
            std::fill_n(tags.begin() + static_cast<std::ptrdiff_t>(i), m->length, m->tag);
            i += m->length;
        } else {
            ++i;
        }
    }
    return tags;
}

// POS and NER together. Words inside a gazetteer entity that the lexicon
// does not know are tagged NOUN, so "Sally" is not read as an -ly adverb.
inline std::vector<Annotation> annotate(std::string_view text, const Lexicon& lexicon, const Gazetteer& gazetteer) {
    const auto words = tokenize_words(text);
    auto out = pos_tag(words, lexicon);
    const auto ner = ner_tag(words, gazetteer);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].ner = ner[i];
        if (ner[i] != NerTag::None && out[i].pos != PosTag::Punct && !annotate_detail::is_numeric(out[i].word.text) &&
            !lexicon.lookup(out[i].word.text))
            out[i].pos = PosTag::Noun;
    }
    return out;
}

// Loaded tagging resources, shared read-only across workers.
struct Annotator {
    Lexicon lexicon;
    Gazetteer gazetteer;

    std::vector<Annotation> operator()(std::string_view text) const { return annotate(text, lexicon, gazetteer); }
};

struct KeywordPolicy {
    enum class Kind : std::uint8_t { Pos, Ner };

    Kind kind = Kind::Pos;
    std::set<PosTag> pos;
    std::set<NerTag> ner;

    static KeywordPolicy only_noun() { return {Kind::Pos, {PosTag::Noun, PosTag::Pron}, {}}; }
    static KeywordPolicy noun_verb() { return {Kind::Pos, {PosTag::Noun, PosTag::Pron, PosTag::Verb}, {}}; }
    static KeywordPolicy entities(std::set<NerTag> tags) { return {Kind::Ner, {}, std::move(tags)}; }

    bool matches(const Annotation& a) const {
        return kind == Kind::Pos ? pos.contains(a.pos) : ner.contains(a.ner);
    }

    // "noun", "noun_verb", "pos:NOUN,ADJ" or "ner:PERSON,TITLE,COUNTRY".
    static KeywordPolicy parse(std::string_view spec) {
        if (spec == "noun") return only_noun();
        if (spec == "noun_verb") return noun_verb();
        auto list = [&](std::string_view body, auto parse_one, auto& into) {
            std::size_t start = 0;
            while (start <= body.size()) {
                auto comma = body.find(',', start);
                if (comma == std::string_view::npos) comma = body.size();
                const auto item = detail::trim(body.substr(start, comma - start));
                auto tag = parse_one(item);
                if (!tag) throw UsageError("unknown tag '" + std::string(item) + "' in keyword policy");
                into.insert(*tag);
                start = comma + 1;
            }
        };
        KeywordPolicy p;
        if (spec.starts_with("pos:")) {
            p.kind = Kind::Pos;
            list(spec.substr(4), parse_pos_tag, p.pos);
            return p;
        }
        if (spec.starts_with("ner:")) {
            p.kind = Kind::Ner;
            list(spec.substr(4), parse_ner_tag, p.ner);
            return p;
        }
        throw UsageError("unknown keyword policy '" + std::string(spec) + "'");
    }

    std::string name() const {
        std::string out = kind == Kind::Pos ? "pos:" : "ner:";
        bool first = true;
        auto add = [&](std::string_view s) {
            if (!first) out += ',';
            out += s;
            first = false;
        };
        if (kind == Kind::Pos)
            for (auto t : pos) add(to_string(t));
        else
            for (auto t : ner) add(to_string(t));
        return out;
    }
};

// Words whose tag is in the policy set, in text order, duplicates kept.
inline std::vector<WordSpan> select_keywords(std::span<const Annotation> annotations, const KeywordPolicy& policy) {
    std::vector<WordSpan> out;
    for (const auto& a : annotations)
        if (policy.matches(a)) out.push_back(a.word);
    return out;
}

} // namespace factsum
