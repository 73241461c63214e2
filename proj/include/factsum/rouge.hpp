#pragma once

// ROUGE-N and sentence-level ROUGE-L.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factsum/detail/text.hpp"
#include "factsum/errors.hpp"

namespace factsum {

struct RougeScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    static RougeScores from_counts(double overlap, double candidate_total, double reference_total) {
        RougeScores s;
        s.precision = candidate_total > 0 ? overlap / candidate_total : 0.0;
        s.recall = reference_total > 0 ? overlap / reference_total : 0.0;
        s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
        return s;
    }
};

struct RougeOptions {
    bool lowercase = true;
    bool stem = false;
    bool remove_stopwords = false;
};

namespace rouge_detail {

// Porter (1980) suffix stripper; a direct port of the reference C version.
class PorterStemmer {
public:
    std::string operator()(std::string word) {
        if (word.size() <= 2) return word;
        b_ = std::move(word);
        k_ = static_cast<int>(b_.size()) - 1;
        j_ = 0;
        step1ab();
        if (k_ > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
        return std::move(b_);
    }

private:
    char at(int i) const { return b_[static_cast<std::size_t>(i)]; }

    bool cons(int i) const {
        switch (at(i)) {
        case 'a': case 'e': case 'i': case 'o': case 'u': return false;
        case 'y': return i == 0 ? true : !cons(i - 1);
        default: return true;
        }
    }

    // Number of consonant-vowel sequences in b_[0..j_].
    int m() const {
        int n = 0;
        int i = 0;
        for (;;) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        for (;;) {
            for (;;) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            for (;;) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool doublec(int j) const { return j >= 1 && at(j) == at(j - 1) && cons(j); }

    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = at(i);
        return !(ch == 'w' || ch == 'x' || ch == 'y');
    }

    bool ends(std::string_view s) {
        const int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (std::string_view(b_).substr(static_cast<std::size_t>(k_ + 1 - len), s.size()) != s) return false;
        j_ = k_ - len;
        return true;
    }

    void setto(std::string_view s) {
        b_.resize(static_cast<std::size_t>(j_ + 1));
        b_ += s;
        k_ = j_ + static_cast<int>(s.size());
    }

    void r(std::string_view s) {
        if (m() > 0) setto(s);
    }

    void step1ab() {
        if (at(k_) == 's') {
            if (ends("sses")) k_ -= 2;
            else if (ends("ies")) setto("i");
            else if (at(k_ - 1) != 's') --k_;
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) setto("ate");
            else if (ends("bl")) setto("ble");
            else if (ends("iz")) setto("ize");
            else if (doublec(k_)) {
                --k_;
                const char ch = at(k_);
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else if (m() == 1 && cvc(k_)) {
                setto("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
    }

    void step2() {
        switch (at(k_ - 1)) {
        case 'a':
            if (ends("ational")) r("ate");
            else if (ends("tional")) r("tion");
            break;
        case 'c':
            if (ends("enci")) r("ence");
            else if (ends("anci")) r("ance");
            break;
        case 'e':
            if (ends("izer")) r("ize");
            break;
        case 'l':
            if (ends("bli")) r("ble");
            else if (ends("alli")) r("al");
            else if (ends("entli")) r("ent");
            else if (ends("eli")) r("e");
            else if (ends("ousli")) r("ous");
            break;
        case 'o':
            if (ends("ization")) r("ize");
            else if (ends("ation")) r("ate");
            else if (ends("ator")) r("ate");
            break;
        case 's':
            if (ends("alism")) r("al");
            else if (ends("iveness")) r("ive");
            else if (ends("fulness")) r("ful");
            else if (ends("ousness")) r("ous");
            break;
        case 't':
            if (ends("aliti")) r("al");
            else if (ends("iviti")) r("ive");
            else if (ends("biliti")) r("ble");
            break;
        case 'g':
            if (ends("logi")) r("log");
            break;
        default: break;
        }
    }

    void step3() {
        switch (at(k_)) {
        case 'e':
            if (ends("icate")) r("ic");
            else if (ends("ative")) r("");
            else if (ends("alize")) r("al");
            break;
        case 'i':
            if (ends("iciti")) r("ic");
            break;
        case 'l':
            if (ends("ical")) r("ic");
            else if (ends("ful")) r("");
            break;
        case 's':
            if (ends("ness")) r("");
            break;
        default: break;
        }
    }

    void step4() {
        bool hit = false;
        switch (at(k_ - 1)) {
        case 'a': hit = ends("al"); break;
        case 'c': hit = ends("ance") || ends("ence"); break;
        case 'e': hit = ends("er"); break;
        case 'i': hit = ends("ic"); break;
        case 'l': hit = ends("able") || ends("ible"); break;
        case 'n': hit = ends("ant") || ends("ement") || ends("ment") || ends("ent"); break;
        case 'o':
            hit = (ends("ion") && j_ >= 0 && (at(j_) == 's' || at(j_) == 't')) || ends("ou");
            break;
        case 's': hit = ends("ism"); break;
        case 't': hit = ends("ate") || ends("iti"); break;
        case 'u': hit = ends("ous"); break;
        case 'v': hit = ends("ive"); break;
        case 'z': hit = ends("ize"); break;
        default: break;
        }
        if (hit && m() > 1) k_ = j_;
    }

    void step5() {
        j_ = k_;
        if (at(k_) == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (at(k_) == 'l' && doublec(k_) && m() > 1) --k_;
    }

    std::string b_;
    int k_ = 0;
    int j_ = 0;
};

inline const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",     "about", "above", "after", "again", "against", "all",   "am",    "an",    "and",   "any",
        "are",   "as",    "at",    "be",    "because", "been",  "before", "being", "below", "between", "both",
        "but",   "by",    "can",   "did",   "do",    "does",    "doing", "down",  "during", "each", "few",
        "for",   "from",  "further", "had", "has",   "have",    "having", "he",   "her",   "here",  "hers",
        "herself", "him", "himself", "his", "how",   "i",       "if",    "in",    "into",  "is",    "it",
        "its",   "itself", "just", "me",    "more",  "most",    "my",    "myself", "no",   "nor",   "not",
        "now",   "of",    "off",   "on",    "once",  "only",    "or",    "other", "our",   "ours",  "ourselves",
        "out",   "over",  "own",   "same",  "she",   "should",  "so",    "some",  "such",  "than",  "that",
        "the",   "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
        "through", "to",  "too",   "under", "until", "up",      "very",  "was",   "we",    "were",  "what",
        "when",  "where", "which", "while", "who",   "whom",    "why",   "will",  "with",  "you",   "your",
        "yours", "yourself", "yourselves"};
    return words;
}

inline std::string ngram_key(std::span<const std::string> tokens, std::size_t at, std::size_t n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) key += '\x1f';
        key += tokens[at + i];
    }
    return key;
}

inline std::map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens, std::size_t n) {
    std::map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[ngram_key(tokens, i, n)];
    return counts;
}

} // namespace rouge_detail

// Lowercases (ASCII) and splits on anything that is not alphanumeric;
// non-ASCII bytes are kept inside tokens.
inline std::vector<std::string> rouge_tokenize(std::string_view text, const RougeOptions& opt = {}) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        if (!(opt.remove_stopwords && rouge_detail::stopwords().contains(cur))) {
            if (opt.stem && cur.size() > 3) cur = rouge_detail::PorterStemmer{}(std::move(cur));
            out.push_back(std::move(cur));
        }
        cur.clear();
    };
    for (const char ch : text) {
        const bool keep = detail::is_ascii_alnum(ch) || static_cast<unsigned char>(ch) >= 0x80;
        if (keep) cur += opt.lowercase ? detail::ascii_lower(ch) : ch;
        else flush();
    }
    flush();
    return out;
}

// Clipped n-gram overlap.
inline RougeScores rouge_n_tokens(std::span<const std::string> candidate, std::span<const std::string> reference,
                                  std::size_t n) {
    if (n == 0) throw UsageError("rouge_n: n must be >= 1");
    const auto cand = rouge_detail::ngram_counts(candidate, n);
    const auto ref = rouge_detail::ngram_counts(reference, n);
    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand) {
        if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(count, it->second);
    }
    const auto total = [](std::span<const std::string> t, std::size_t k) { return t.size() >= k ? t.size() - k + 1 : 0; };
    return RougeScores::from_counts(static_cast<double>(overlap), static_cast<double>(total(candidate, n)),
                                    static_cast<double>(total(reference, n)));
}

inline RougeScores rouge_n(std::string_view candidate, std::string_view reference, std::size_t n,
                           const RougeOptions& opt = {}) {
    return rouge_n_tokens(rouge_tokenize(candidate, opt), rouge_tokenize(reference, opt), n);
}

inline std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline RougeScores rouge_l_tokens(std::span<const std::string> candidate, std::span<const std::string> reference) {
    const auto l = static_cast<double>(lcs_length(candidate, reference));
    return RougeScores::from_counts(l, static_cast<double>(candidate.size()), static_cast<double>(reference.size()));
}

inline RougeScores rouge_l(std::string_view candidate, std::string_view reference, const RougeOptions& opt = {}) {
    return rouge_l_tokens(rouge_tokenize(candidate, opt), rouge_tokenize(reference, opt));
}

struct RougeSet {
    RougeScores rouge1;
    RougeScores rouge2;
    RougeScores rougeL;
};

inline RougeSet rouge_all(std::string_view candidate, std::string_view reference, const RougeOptions& opt = {}) {
    const auto c = rouge_tokenize(candidate, opt);
    const auto r = rouge_tokenize(reference, opt);
    return {rouge_n_tokens(c, r, 1), rouge_n_tokens(c, r, 2), rouge_l_tokens(c, r)};
}

// Unweighted mean over pairs, scaled to 0-100.
inline RougeSet corpus_rouge(std::span<const RougeSet> per_pair) {
    if (per_pair.empty()) throw DataError("corpus_rouge: no pairs");
    RougeSet sum;
    auto add = [](RougeScores& acc, const RougeScores& s) {
        acc.precision += s.precision;
        acc.recall += s.recall;
        acc.f1 += s.f1;
    };
    for (const auto& s : per_pair) {
        add(sum.rouge1, s.rouge1);
        add(sum.rouge2, s.rouge2);
        add(sum.rougeL, s.rougeL);
    }
    const double scale = 100.0 / static_cast<double>(per_pair.size());
    for (auto* s : {&sum.rouge1, &sum.rouge2, &sum.rougeL}) {
        s->precision *= scale;
        s->recall *= scale;
        s->f1 *= scale;
    }
    return sum;
}

inline RougeSet corpus_rouge(std::span<const std::pair<std::string, std::string>> pairs, const RougeOptions& opt = {}) {
    std::vector<RougeSet> per_pair;
    per_pair.reserve(pairs.size());
    for (const auto& [cand, ref] : pairs) per_pair.push_back(rouge_all(cand, ref, opt));
    return corpus_rouge(per_pair);
}

} // namespace factsum
