// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"

using namespace factsum;
using factsum::testing::annotator;
using factsum::testing::fixture_path;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Document doc(std::string id, std::string source, std::string target) {
    Document d;
    d.id = std::move(id);
    d.source = std::move(source);
    d.target = std::move(target);
    return d;
}

std::string n_words(std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += i ? " word" : "word";
    return out;
}

Outcome bpe_fidelity() {
    Outcome o;
    const auto start = Clock::now();
    if (!factsum::testing::have_gpt2()) {
        o.check(false, "GPT-2 vocab files not found under data/gpt2");
        return o;
    }
    const auto& v = factsum::testing::gpt2();
    std::vector<std::string> got;
    for (const auto& t : encode(v, "Biden is the president of the United States.")) got.push_back(t.text);
    const std::vector<std::string> want = {"B", "iden", " is", " the", " president", " of", " the", " United", " States", "."};
    o.check(got == want, "token list differs from the expected GPT-2 split");

    std::mt19937 rng(1);
    int round_trips = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string s(rng() % 64, '\0');
        for (auto& c : s) c = static_cast<char>(rng() % 256);
        if (decode(v, encode(v, s)) == s) ++round_trips;
    }
    o.check(round_trips == 1000, std::to_string(1000 - round_trips) + " random byte strings failed to round-trip");
    const double t = seconds_since(start);
    o.check(t < 5.0, "took " + fmt("%.2f", t) + " s");
    if (o.ok) o.detail = "president sentence tokens exact, 1000/1000 round trips, " + fmt("%.2f", t) + " s";
    return o;
}

Outcome rouge_oracle() {
    Outcome o;
    const auto start = Clock::now();
    std::size_t pairs = 0, mismatches = 0;
    auto compare = [&](const oracle::Seq& c, const oracle::Seq& r) {
        ++pairs;
        const bool same = std::abs(rouge_n_tokens(c, r, 1).f1 - oracle::naive_rouge_n(c, r, 1)) <= 1e-12 &&
                          std::abs(rouge_n_tokens(c, r, 2).f1 - oracle::naive_rouge_n(c, r, 2)) <= 1e-12 &&
                          std::abs(rouge_l_tokens(c, r).f1 - oracle::naive_rouge_l(c, r)) <= 1e-12;
        if (!same) ++mismatches;
    };
    std::vector<oracle::Seq> seqs;
    oracle::Seq cur;
    oracle::all_sequences(4, cur, seqs); // every pair up to length 4
    for (const auto& c : seqs)
        for (const auto& r : seqs) compare(c, r);
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 100000; ++trial) { // sampled pairs up to length 8
        oracle::Seq c(rng() % 9), r(rng() % 9);
        for (auto& w : c) w = oracle::kWords[rng() % oracle::kWords.size()];
        for (auto& w : r) w = oracle::kWords[rng() % oracle::kWords.size()];
        compare(c, r);
    }
    o.check(mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(pairs) + " pairs differ");
    o.check(pairs >= 10000, "only " + std::to_string(pairs) + " pairs");
    const double hand = rouge_all("the cat sat", "the cat ran").rouge1.f1 * 100;
    o.check(std::abs(hand - 66.67) <= 0.01, "hand case gave " + fmt("%.4f", hand));
    const double t = seconds_since(start);
    o.check(t < 60.0, "took " + fmt("%.2f", t) + " s");
    if (o.ok)
        o.detail = std::to_string(pairs) + " pairs exact, hand case " + fmt("%.2f", hand) + ", " + fmt("%.2f", t) + " s";
    return o;
}

Outcome openie() {
    Outcome o;
    auto one = [&](const std::string& text, const std::string& s, const std::string& r, const std::string& obj) {
        const auto ex = extract_document(text, annotator());
        if (ex.triples.size() != 1) return false;
        const auto& t = ex.triples[0];
        auto exact = [&](const Argument& a, const std::string& want) {
            return a.text == want && text.substr(a.bytes.begin, a.bytes.end - a.bytes.begin) == want;
        };
        return exact(t.subject, s) && exact(t.relation, r) && exact(t.object, obj);
    };
    o.check(one("Barack Obama was born in Hawaii.", "Barack Obama", "was born in", "Hawaii"), "Obama sentence");
    o.check(one("Sally Forrest died on March 15.", "Sally Forrest", "died on", "March 15"), "Sally Forrest sentence");

    const auto lines = detail::split_lines(detail::read_file(fixture_path("openie_sentences.txt")));
    int checked = 0, agree = 0;
    for (const auto& line : lines) {
        if (line.empty()) continue;
        const std::string text(line);
        const auto ann = annotator()(text);
        if (ann.size() > 13) continue; // 12 words plus final punctuation
        ++checked;
        if (oracle::spans_of(extract_triples(ann, text), 0) == oracle::openie(ann)) ++agree;
    }
    o.check(checked == 200, "fixture has " + std::to_string(checked) + " usable sentences");
    o.check(agree == checked, std::to_string(checked - agree) + " sentences disagree with the oracle");
    if (o.ok) o.detail = "both examples exact, oracle agrees on " + std::to_string(agree) + "/200 sentences";
    return o;
}

Outcome prompt_serialization() {
    Outcome o;
    const auto a = detail::read_file(fixture_path("golden/relation_died_on.txt"));
    const auto b = detail::read_file(fixture_path("golden/relation_double_quoted.txt"));
    o.check(serialize_relation("Sally Forrest", "died on", "March 15") == a, "died-on relation string");
    o.check(serialize_relation("Prince Harry", "is in", "attendance for England 's crunch match against France") == b,
            "double-quoted relation string");
    if (o.ok) o.detail = "died-on and double-quoted golden strings byte-exact";
    return o;
}

Outcome coco_laws() {
    Outcome o;
    const auto& v = factsum::testing::any_vocab();

    const factsum::testing::ContextFreeScorer flat(v);
    int zero = 0, pairs = 0;
    for (const auto& d : factsum::testing::synthetic_corpus(50, 11))
        for (const auto* s : {&d.copied, &d.swapped}) {
            ++pairs;
            if (coco_score(flat, d.doc.source, *s, KeywordPolicy::only_noun(), annotator()).coco == 0.0) ++zero;
        }
    o.check(pairs == 100 && zero == 100, "zero law held for " + std::to_string(zero) + "/" + std::to_string(pairs));

    const BuiltinScorer scorer(v);
    const auto policy = KeywordPolicy::entities({NerTag::Person, NerTag::Title, NerTag::Country});
    const std::string x = "Biden is the president of the United States.";
    const auto ref = coco_score(scorer, x, x, policy, annotator());
    const auto gen = coco_score(scorer, x, "Obama is the president of the United States.", policy, annotator());
    o.check(ref.coco > gen.coco, "reference vs swapped: " + fmt("%.4f", ref.coco) + " vs " + fmt("%.4f", gen.coco));

    int wins = 0;
    double worst = 0.0;
    const auto corpus = factsum::testing::synthetic_corpus(50, 12);
    for (const auto& d : corpus) {
        const auto c = coco_score(scorer, d.doc.source, d.copied, KeywordPolicy::only_noun(), annotator());
        const auto s = coco_score(scorer, d.doc.source, d.swapped, KeywordPolicy::only_noun(), annotator());
        if (c.coco > s.coco) ++wins;
        for (const auto* r : {&c, &s}) {
            double sum = 0.0;
            for (const auto& k : r->keywords) sum += k.delta();
            worst = std::max(worst, std::abs(r->coco - sum / static_cast<double>(r->n)));
        }
    }
    o.check(wins * 10 >= static_cast<int>(corpus.size()) * 9, "sign law held for " + std::to_string(wins) + "/50");
    o.check(worst <= 1e-9, "consistency off by " + fmt("%.3g", worst));
    if (o.ok)
        o.detail = "zero 100/100, reference vs swap " + fmt("%.3f", ref.coco) + " > " + fmt("%.3f", gen.coco) + ", sign " +
                   std::to_string(wins) + "/50, consistency " + fmt("%.1g", worst);
    return o;
}

Outcome masking() {
    Outcome o;
    const auto policy = KeywordPolicy::entities({NerTag::Person, NerTag::Title, NerTag::Country});
    const std::string x = "Biden is the president of the United States.";
    const auto kw_r = select_keywords(annotator()(x), policy);
    const auto kw_g = select_keywords(annotator()("Obama is the president of the United States."), policy);
    o.check(build_masked_document(x, kw_r).text == "<mask> is the <mask> of the <mask> <mask>.", "M_r string");
    o.check(build_masked_document(x, kw_g).text == "Biden is the <mask> of the <mask> <mask>.", "M_g string");

    std::mt19937 rng(31);
    const std::vector<std::string> pool = {"Biden", "the", "president", "of", "United", "States", "it's",
                                           "3.5",   ",",   ".",         "Dog", "dog",    "\"hi\"", "U.S."};
    const std::vector<std::string> seps = {" ", "  ", "\n", "", "\t"};
    int ok = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::string text;
        for (int i = 0, n = static_cast<int>(rng() % 25); i < n; ++i)
            text += pool[rng() % pool.size()] + seps[rng() % seps.size()];
        std::vector<WordSpan> kw;
        for (const auto& w : tokenize_words(text))
            if (rng() % 3 == 0) kw.push_back(w);
        if (unmask(build_masked_document(text, kw)) == text) ++ok;
    }
    o.check(ok == 500, "unmask failed on " + std::to_string(500 - ok) + " fixtures");
    if (o.ok) o.detail = "M_r and M_g byte-exact, unmask 500/500";
    return o;
}

Outcome senex_builders() {
    Outcome o;
    const auto& v = factsum::testing::any_vocab();
    std::vector<Document> docs;
    for (const auto& d : factsum::testing::synthetic_corpus(30, 5)) docs.push_back(d.doc);
    for (auto& d : docs) d.target.clear();

    for (const auto& d : build_senex_dataset(docs, SenExMode::SenEx2, 0, v).documents) {
        const auto t = encode(v, d.target);
        o.check(t.size() >= 3 && d.prompt && *d.prompt == t[0].text + t[1].text + t[2].text, "SenEx2 hint on " + d.id);
    }
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        for (const auto& d : build_senex_dataset(docs, SenExMode::SenEx3, seed, v).documents) {
            const auto ids = d.extra["hint_token_ids"].get<std::vector<TokenId>>();
            o.check(d.prompt && oracle::ordered_triple_in(encode(v, d.target), ids, *d.prompt), "SenEx3 hint on " + d.id);
            ++checked;
        }
    auto dump = [&](std::uint64_t seed) { return write_jsonl(build_senex_dataset(docs, SenExMode::SenEx3, seed, v).documents); };
    o.check(dump(42) == dump(42), "seed 42 not reproducible");
    if (o.ok) o.detail = "SenEx2 first-3, SenEx3 subsequence on " + std::to_string(checked) + " hints, seed reproducible";
    return o;
}

Outcome length_filter() {
    Outcome o;
    const std::vector<Document> docs = {doc("keep", n_words(700), n_words(100)), doc("drop", n_words(750), n_words(100))};
    const auto r = filter_by_length(docs);
    o.check(r.kept.size() == 1 && r.kept[0].id == "keep", "700+100 not kept");
    o.check(r.dropped == std::vector<std::string>{"drop"}, "750+100 not dropped");

    auto p = doc("p", n_words(700), n_words(100));
    p.prompt = n_words(60);
    const std::vector<Document> prompted = {p};
    o.check(filter_by_length(prompted, 800, false).kept.size() == 1, "prompt counted without with_prompt");
    o.check(filter_by_length(prompted, 800, true).dropped.size() == 1, "prompt not counted with with_prompt");
    if (o.ok) o.detail = "700+100 kept, 750+100 dropped, +60-word prompt recounted";
    return o;
}

Outcome harness_determinism() {
    Outcome o;
    const auto start = Clock::now();
    const auto corpus = factsum::testing::synthetic_corpus(200, 77);
    std::vector<Document> docs;
    std::vector<Candidate> cands;
    for (const auto& d : corpus) {
        docs.push_back(d.doc);
        cands.push_back({d.doc.id, d.swapped});
    }
    const BuiltinScorer scorer(factsum::testing::any_vocab());
    RunConfig serial, parallel;
    parallel.workers = 8;
    const auto a = cmd_eval(docs, cands, serial, scorer, annotator());
    const auto b = cmd_eval(docs, cands, parallel, scorer, annotator());
    o.check(report_to_json(a, false).dump() == report_to_json(b, false).dump(), "JSON reports differ");
    o.check(report_to_csv(a) == report_to_csv(b), "CSV reports differ");
    const double t = seconds_since(start);
    o.check(t < 120.0, "took " + fmt("%.2f", t) + " s");
    if (o.ok) o.detail = "200 documents, workers 1 vs 8 byte-identical, " + fmt("%.2f", t) + " s";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"BPE fidelity", bpe_fidelity},
        {"ROUGE oracle equivalence", rouge_oracle},
        {"OpenIE", openie},
        {"Prompt serialization", prompt_serialization},
        {"CoCo zero/sign/consistency laws", coco_laws},
        {"Masking", masking},
        {"SenEx builders", senex_builders},
        {"Length filter", length_filter},
        {"Harness determinism", harness_determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
        if (!o.ok) ++failed;
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
