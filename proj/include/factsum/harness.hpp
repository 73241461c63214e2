#pragma once

// Corpus plumbing behind the command-line tool: JSONL I/O, run
// configuration, a bounded worker pool, and the prompt / senex / eval /
// cases pipelines.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "factsum/annotate.hpp"
#include "factsum/bpe.hpp"
#include "factsum/coco.hpp"
#include "factsum/detail/text.hpp"
#include "factsum/errors.hpp"
#include "factsum/openie.hpp"
#include "factsum/prompt.hpp"
#include "factsum/rouge.hpp"
#include "factsum/scorer.hpp"

namespace factsum {

// ---------------------------------------------------------------- JSONL

inline std::vector<Document> parse_jsonl(std::string_view text, const std::string& name = "<jsonl>") {
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(name, i + 1, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(name, i + 1, "expected a JSON object");
        Document d;
        auto field = [&](const char* key, bool required) -> std::optional<std::string> {
            auto it = j.find(key);
            if (it == j.end() || it->is_null()) {
                if (required) throw ParseError(name, i + 1, std::string("missing field \"") + key + "\"");
                return std::nullopt;
            }
            if (it->is_string()) return it->get<std::string>();
            if (std::string_view(key) == "id" && it->is_number_integer()) return it->dump();
            throw ParseError(name, i + 1, std::string("field \"") + key + "\" must be a string");
        };
        d.id = *field("id", true);
        d.source = *field("source", true);
        d.target = field("target", false).value_or("");
        d.prompt = field("prompt", false);
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& k = it.key();
            // "input" is derived from prompt + source and rebuilt on output.
            if (k == "id" || k == "source" || k == "target" || k == "prompt" || k == "input") continue;
            d.extra[k] = it.value();
        }
        if (!seen.insert(d.id).second) throw ParseError(name, i + 1, "duplicate id '" + d.id + "'");
        docs.push_back(std::move(d));
    }
    return docs;
}

inline std::vector<Document> ingest_jsonl(const std::string& path) { return parse_jsonl(detail::read_file(path), path); }

inline nlohmann::ordered_json document_to_json(const Document& d) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["source"] = d.source;
    j["target"] = d.target;
    if (d.prompt) {
        j["prompt"] = *d.prompt;
        j["input"] = d.input();
    }
    for (auto it = d.extra.begin(); it != d.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

inline std::string write_jsonl(std::span<const Document> docs) {
    std::string out;
    for (const auto& d : docs) {
        out += document_to_json(d).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

struct Candidate {
    std::string id;
    std::string summary;
};

// {"id": ..., "summary": ...} per line.
inline std::vector<Candidate> parse_candidates(std::string_view text, const std::string& name = "<candidates>") {
    std::vector<Candidate> out;
    std::unordered_set<std::string> seen;
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(name, i + 1, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(name, i + 1, "expected a JSON object");
        const auto id = j.find("id");
        const auto summary = j.find("summary");
        if (id == j.end() || !(id->is_string() || id->is_number_integer()))
            throw ParseError(name, i + 1, "missing or non-string field \"id\"");
        if (summary == j.end() || !summary->is_string())
            throw ParseError(name, i + 1, "missing or non-string field \"summary\"");
        Candidate c{id->is_string() ? id->get<std::string>() : id->dump(), summary->get<std::string>()};
        if (!seen.insert(c.id).second) throw ParseError(name, i + 1, "duplicate id '" + c.id + "'");
        out.push_back(std::move(c));
    }
    return out;
}

inline std::vector<Candidate> load_candidates(const std::string& path) {
    return parse_candidates(detail::read_file(path), path);
}

// ---------------------------------------------------------------- config

enum class RelationSource { SourceText, TargetText };

inline constexpr const char* kEndpointEnv = "FACTSUM_SCORER_URL";

struct RunConfig {
    std::string input;
    std::string output;
    std::string vocab = std::string(FACTSUM_DATA_DIR) + "/gpt2/encoder.json";
    std::string merges = std::string(FACTSUM_DATA_DIR) + "/gpt2/vocab.bpe";
    std::string lexicon = std::string(FACTSUM_DATA_DIR) + "/lexicon.tsv";
    std::string gazetteer = std::string(FACTSUM_DATA_DIR) + "/gazetteer.tsv";
    RelationSource relation_source = RelationSource::TargetText;
    std::set<NerTag> whitelist = {NerTag::Person, NerTag::Org, NerTag::Country, NerTag::Loc};
    std::string keyword_policy = "noun";
    std::string scorer = "builtin"; // builtin | remote
    double alpha = 1.0;
    std::string endpoint;
    long timeout_ms = 30000;
    std::size_t max_in_flight = 4;
    std::size_t length_limit = kDefaultLengthLimit;
    std::string length_unit = "words"; // words | bpe
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool rouge_stem = false;
    bool rouge_stopwords = false;
};

namespace harness_detail {

inline std::uint64_t parse_unsigned(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    if (v.empty()) throw UsageError(std::string(key) + ": expected a non-negative integer");
    for (const char c : v) {
        if (!detail::is_ascii_digit(c)) throw UsageError(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
        out = out * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
    const auto l = detail::to_lower(v);
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    throw UsageError(std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

inline std::set<NerTag> parse_whitelist(std::string_view v) {
    std::set<NerTag> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        auto comma = v.find(',', start);
        if (comma == std::string_view::npos) comma = v.size();
        const auto item = detail::trim(v.substr(start, comma - start));
        if (!item.empty()) {
            const auto tag = parse_ner_tag(item);
            if (!tag || *tag == NerTag::None) throw UsageError("whitelist: unknown NER tag '" + std::string(item) + "'");
            out.insert(*tag);
        }
        start = comma + 1;
    }
    return out;
}

} // namespace harness_detail

inline std::string_view to_string(RelationSource s) {
    return s == RelationSource::SourceText ? "source_text" : "target_text";
}

inline void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
    using namespace harness_detail;
    const auto v = detail::trim(raw);
    const std::string value(v);
    if (key == "input") c.input = value;
    else if (key == "output") c.output = value;
    else if (key == "vocab") c.vocab = value;
    else if (key == "merges") c.merges = value;
    else if (key == "lexicon") c.lexicon = value;
    else if (key == "gazetteer") c.gazetteer = value;
    else if (key == "relation_source") {
        if (v == "source_text" || v == "source") c.relation_source = RelationSource::SourceText;
        else if (v == "target_text" || v == "target") c.relation_source = RelationSource::TargetText;
        else throw UsageError("relation_source: expected source_text or target_text, got '" + value + "'");
    } else if (key == "whitelist") c.whitelist = parse_whitelist(v);
    else if (key == "keyword_policy") {
        KeywordPolicy::parse(v);
        c.keyword_policy = value;
    } else if (key == "scorer") {
        if (v != "builtin" && v != "remote") throw UsageError("scorer: expected builtin or remote, got '" + value + "'");
        c.scorer = value;
    } else if (key == "alpha") {
        char* end = nullptr;
        c.alpha = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0' || !(c.alpha > 0)) throw UsageError("alpha: expected a positive number");
    } else if (key == "endpoint") c.endpoint = value;
    else if (key == "timeout_ms") c.timeout_ms = static_cast<long>(parse_unsigned(key, v));
    else if (key == "max_in_flight") c.max_in_flight = parse_unsigned(key, v);
    else if (key == "length_limit") c.length_limit = parse_unsigned(key, v);
    else if (key == "length_unit") {
        if (v != "words" && v != "bpe") throw UsageError("length_unit: expected words or bpe, got '" + value + "'");
        c.length_unit = value;
    } else if (key == "seed") c.seed = parse_unsigned(key, v);
    else if (key == "workers") c.workers = parse_unsigned(key, v);
    else if (key == "rouge_stem") c.rouge_stem = parse_bool(key, v);
    else if (key == "rouge_stopwords") c.rouge_stopwords = parse_bool(key, v);
    else throw UsageError("unknown configuration key '" + std::string(key) + "'");
}

// key = value lines; '#' comments; blank lines ignored.
inline void parse_config(RunConfig& c, std::string_view text, const std::string& name = "<config>") {
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = detail::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw UsageError(name + ":" + std::to_string(i + 1) + ": expected key = value");
        try {
            apply_setting(c, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const UsageError& e) {
            throw UsageError(name + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

inline void load_config(RunConfig& c, const std::string& path) {
    std::string text;
    try {
        text = detail::read_file(path);
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
    parse_config(c, text, path);
}

inline void apply_environment(RunConfig& c) {
    if (const char* url = std::getenv(kEndpointEnv); url && *url) c.endpoint = url;
}

inline void validate(const RunConfig& c) {
    if (c.workers < 1) throw UsageError("workers must be >= 1");
    if (!c.input.empty() && c.input == c.output) throw UsageError("input and output paths must differ");
    if (c.scorer == "remote") {
        if (c.endpoint.empty()) throw UsageError("scorer = remote needs an endpoint (or " + std::string(kEndpointEnv) + ")");
        if (c.timeout_ms <= 0) throw UsageError("timeout_ms must be > 0");
    }
}

// Stable text form of every setting; its hash goes into report provenance.
inline std::string canonical_config(const RunConfig& c) {
    std::ostringstream o;
    std::string wl;
    for (auto t : c.whitelist) {
        if (!wl.empty()) wl += ',';
        wl += to_string(t);
    }
    char alpha[64];
    std::snprintf(alpha, sizeof alpha, "%.17g", c.alpha);
    o << "alpha=" << alpha << '\n'
      << "endpoint=" << c.endpoint << '\n'
      << "gazetteer=" << c.gazetteer << '\n'
      << "input=" << c.input << '\n'
      << "keyword_policy=" << c.keyword_policy << '\n'
      << "length_limit=" << c.length_limit << '\n'
      << "length_unit=" << c.length_unit << '\n'
      << "lexicon=" << c.lexicon << '\n'
      << "max_in_flight=" << c.max_in_flight << '\n'
      << "merges=" << c.merges << '\n'
      << "relation_source=" << to_string(c.relation_source) << '\n'
      << "rouge_stem=" << c.rouge_stem << '\n'
      << "rouge_stopwords=" << c.rouge_stopwords << '\n'
      << "scorer=" << c.scorer << '\n'
      << "seed=" << c.seed << '\n'
      << "timeout_ms=" << c.timeout_ms << '\n'
      << "vocab=" << c.vocab << '\n'
      << "whitelist=" << wl << '\n';
    return o.str();
}

inline std::string config_hash(const RunConfig& c) {
    detail::Fnv1a h;
    h.update(canonical_config(c));
    return h.hex();
}

inline ScorerHandle scorer_handle(const RunConfig& c) {
    if (c.scorer == "remote")
        return RemoteScorerConfig{c.endpoint, std::chrono::milliseconds(c.timeout_ms), c.max_in_flight, true};
    return BuiltinScorerConfig{c.alpha, std::string(kMaskToken)};
}

inline RougeOptions rouge_options(const RunConfig& c) { return {true, c.rouge_stem, c.rouge_stopwords}; }

inline Annotator load_annotator(const RunConfig& c) {
    return Annotator{Lexicon::load(c.lexicon), Gazetteer::load(c.gazetteer)};
}

// ---------------------------------------------------------------- workers

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
// written by index; if several items throw, the lowest index's exception is
// rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        const auto count = std::min(workers, n);
        pool.reserve(count);
        for (std::size_t w = 0; w < count; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- prompt

struct PromptRun {
    std::vector<Document> documents; // after the length filter
    std::size_t prompted = 0;
    std::size_t unprompted = 0;
    std::vector<std::string> dropped; // ids removed by the length filter
};

// The key relation for one document, or the reason there is none.
inline std::pair<std::optional<Triple>, std::string> key_relation_for(const Document& doc, const RunConfig& c,
                                                                      const Annotator& annotator) {
    const std::string& text = c.relation_source == RelationSource::TargetText ? doc.target : doc.source;
    const auto ex = extract_document(text, annotator);
    if (ex.triples.empty()) return {std::nullopt, "no triples"};
    const auto kept = filter_triples(ex.triples, c.whitelist, ex.annotations);
    if (kept.empty()) return {std::nullopt, "no triple passed the entity filter"};
    return {select_key_relation(kept), ""};
}

inline PromptRun cmd_prompt(std::span<const Document> docs, const RunConfig& c, const Annotator& annotator,
                            const Vocabulary* vocab = nullptr) {
    std::vector<Document> built(docs.size());
    parallel_for(docs.size(), c.workers, [&](std::size_t i) {
        const auto& doc = docs[i];
        Document out = doc;
        try {
            auto [triple, reason] = key_relation_for(doc, c, annotator);
            if (triple) {
                const auto p = build_prompted_source(doc, *triple);
                out.prompt = p.prompt;
                out.extra["relation"] = {{"subject", triple->subject.text},
                                         {"relation", triple->relation.text},
                                         {"object", triple->object.text}};
                out.extra["prompted"] = true;
            } else {
                out.extra["prompted"] = false;
                out.extra["unprompted_reason"] = reason;
            }
        } catch (const Error& e) {
            throw DataError("document '" + doc.id + "': " + e.what());
        }
        built[i] = std::move(out);
    });

    PromptRun run;
    const LengthMeasure measure{c.length_unit == "bpe" ? vocab : nullptr};
    if (c.length_unit == "bpe" && !vocab) throw UsageError("length_unit = bpe needs a vocabulary");
    auto filtered = filter_by_length(built, c.length_limit, true, measure);
    run.documents = std::move(filtered.kept);
    run.dropped = std::move(filtered.dropped);
    for (const auto& d : run.documents) (d.prompt ? run.prompted : run.unprompted)++;
    return run;
}

// ---------------------------------------------------------------- senex

inline std::string write_skip_report(std::span<const SkipRecord> skipped) {
    std::string out;
    for (const auto& s : skipped) out += nlohmann::ordered_json{{"id", s.id}, {"reason", s.reason}}.dump() + "\n";
    return out;
}

// ---------------------------------------------------------------- eval

struct PolicyScore {
    std::optional<double> coco; // empty when skipped
    std::size_t n_keywords = 0;
    std::string skip_reason;
};

struct EvalRow {
    std::string id;
    bool missing = false;
    RougeSet rouge;
    PolicyScore only_noun;
    PolicyScore noun_verb;
};

struct PolicyAggregate {
    std::optional<double> mean_coco;
    std::size_t scored = 0;
    std::size_t skipped = 0;
};

struct EvalAggregate {
    std::size_t documents = 0;
    std::size_t evaluated = 0;
    std::size_t missing = 0;
    std::optional<RougeSet> rouge; // percentages
    PolicyAggregate only_noun;
    PolicyAggregate noun_verb;
};

struct Provenance {
    std::string config_hash;
    std::string vocab_hash;
    std::string scorer_model_id;
    std::string generated_at;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    EvalAggregate aggregate;
    Provenance provenance;
};

inline EvalAggregate aggregate_rows(std::span<const EvalRow> rows) {
    EvalAggregate a;
    a.documents = rows.size();
    std::vector<RougeSet> rouge;
    double sum_noun = 0.0;
    double sum_nv = 0.0;
    for (const auto& r : rows) {
        if (r.missing) {
            ++a.missing;
            continue;
        }
        ++a.evaluated;
        rouge.push_back(r.rouge);
        auto tally = [](const PolicyScore& s, PolicyAggregate& agg, double& sum) {
            if (s.coco) {
                ++agg.scored;
                sum += *s.coco;
            } else {
                ++agg.skipped;
            }
        };
        tally(r.only_noun, a.only_noun, sum_noun);
        tally(r.noun_verb, a.noun_verb, sum_nv);
    }
    if (!rouge.empty()) a.rouge = corpus_rouge(rouge);
    if (a.only_noun.scored) a.only_noun.mean_coco = sum_noun / static_cast<double>(a.only_noun.scored);
    if (a.noun_verb.scored) a.noun_verb.mean_coco = sum_nv / static_cast<double>(a.noun_verb.scored);
    return a;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline PolicyScore score_policy(const Scorer& scorer, const Document& doc, std::string_view summary,
                                const KeywordPolicy& policy, const Annotator& annotator) {
    PolicyScore s;
    try {
        const auto r = coco_score(scorer, doc.source, summary, policy, annotator);
        s.coco = r.coco;
        s.n_keywords = r.n;
    } catch (const NoKeywordsError& e) {
        s.skip_reason = e.what();
    }
    return s;
}

inline EvalReport cmd_eval(std::span<const Document> docs, std::span<const Candidate> candidates, const RunConfig& c,
                           const Scorer& scorer, const Annotator& annotator, const std::string& vocab_hash = "") {
    std::unordered_map<std::string, const Candidate*> by_id;
    for (const auto& cand : candidates) by_id[cand.id] = &cand;
    std::unordered_set<std::string> corpus_ids;
    for (const auto& d : docs) corpus_ids.insert(d.id);
    for (const auto& cand : candidates)
        if (!corpus_ids.contains(cand.id)) throw DataError("candidate id '" + cand.id + "' is not in the corpus");

    const auto opts = rouge_options(c);
    const auto only_noun = KeywordPolicy::only_noun();
    const auto noun_verb = KeywordPolicy::noun_verb();

    EvalReport report;
    report.rows.resize(docs.size());
    parallel_for(docs.size(), c.workers, [&](std::size_t i) {
        const auto& doc = docs[i];
        auto& row = report.rows[i];
        row.id = doc.id;
        const auto it = by_id.find(doc.id);
        if (it == by_id.end()) {
            row.missing = true;
            return;
        }
        const auto& summary = it->second->summary;
        row.rouge = rouge_all(summary, doc.target, opts);
        row.only_noun = score_policy(scorer, doc, summary, only_noun, annotator);
        row.noun_verb = score_policy(scorer, doc, summary, noun_verb, annotator);
    });
    report.aggregate = aggregate_rows(report.rows);
    report.provenance = {config_hash(c), vocab_hash, scorer.model_id(), utc_timestamp()};
    return report;
}

namespace harness_detail {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline nlohmann::ordered_json scores_json(const RougeScores& s) {
    return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

inline nlohmann::ordered_json policy_json(const PolicyScore& s) {
    nlohmann::ordered_json j;
    j["coco"] = s.coco ? nlohmann::ordered_json(*s.coco) : nlohmann::ordered_json(nullptr);
    j["n_keywords"] = s.n_keywords;
    j["skipped"] = !s.coco.has_value();
    if (!s.coco) j["skip_reason"] = s.skip_reason;
    return j;
}

inline nlohmann::ordered_json aggregate_json(const PolicyAggregate& a) {
    return {{"mean_coco", a.mean_coco ? nlohmann::ordered_json(*a.mean_coco) : nlohmann::ordered_json(nullptr)},
            {"scored", a.scored},
            {"skipped", a.skipped}};
}

} // namespace harness_detail

inline nlohmann::ordered_json report_to_json(const EvalReport& r, bool with_timestamp = true) {
    using namespace harness_detail;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json j;
        j["id"] = row.id;
        j["missing"] = row.missing;
        if (!row.missing) {
            j["rouge1"] = scores_json(row.rouge.rouge1);
            j["rouge2"] = scores_json(row.rouge.rouge2);
            j["rougeL"] = scores_json(row.rouge.rougeL);
            j["only_noun"] = policy_json(row.only_noun);
            j["noun_verb"] = policy_json(row.noun_verb);
        }
        rows.push_back(std::move(j));
    }
    nlohmann::ordered_json agg;
    agg["documents"] = r.aggregate.documents;
    agg["evaluated"] = r.aggregate.evaluated;
    agg["missing"] = r.aggregate.missing;
    if (r.aggregate.rouge) {
        agg["rouge1"] = scores_json(r.aggregate.rouge->rouge1);
        agg["rouge2"] = scores_json(r.aggregate.rouge->rouge2);
        agg["rougeL"] = scores_json(r.aggregate.rouge->rougeL);
    } else {
        agg["rouge1"] = agg["rouge2"] = agg["rougeL"] = nullptr;
    }
    agg["only_noun"] = aggregate_json(r.aggregate.only_noun);
    agg["noun_verb"] = aggregate_json(r.aggregate.noun_verb);
    nlohmann::ordered_json prov;
    prov["config_hash"] = r.provenance.config_hash;
    prov["vocab_hash"] = r.provenance.vocab_hash;
    prov["scorer_model_id"] = r.provenance.scorer_model_id;
    if (with_timestamp) prov["generated_at"] = r.provenance.generated_at;
    return {{"rows", rows}, {"aggregate", agg}, {"provenance", prov}};
}

// One flat row per document; ROUGE F1 as percentages.
inline std::string report_to_csv(const EvalReport& r) {
    using harness_detail::fixed;
    std::string out = "id,status,rouge1,rouge2,rougeL,coco_noun,n_noun,coco_noun_verb,n_noun_verb\n";
    auto csv_field = [](const std::string& s) {
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string q = "\"";
        for (const char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    };
    for (const auto& row : r.rows) {
        out += csv_field(row.id);
        if (row.missing) {
            out += ",missing,,,,,,,\n";
            continue;
        }
        auto coco = [&](const PolicyScore& s) {
            return (s.coco ? fixed(*s.coco, 6) : std::string()) + "," + std::to_string(s.n_keywords);
        };
        out += ",ok," + fixed(row.rouge.rouge1.f1 * 100, 4) + "," + fixed(row.rouge.rouge2.f1 * 100, 4) + "," +
               fixed(row.rouge.rougeL.f1 * 100, 4) + "," + coco(row.only_noun) + "," + coco(row.noun_verb) + "\n";
    }
    return out;
}

// Corpus-level summary: ROUGE F1 x100 and mean CoCo, two decimals.
inline std::string report_summary(const EvalReport& r) {
    using harness_detail::fixed;
    const auto& a = r.aggregate;
    auto opt = [](const std::optional<double>& v) { return v ? fixed(*v, 2) : std::string("n/a"); };
    std::string out = "| ROUGE-1 | ROUGE-2 | ROUGE-L | Only Noun | Noun+Verb |\n|---|---|---|---|---|\n";
    if (a.rouge)
        out += "| " + fixed(a.rouge->rouge1.f1, 2) + " | " + fixed(a.rouge->rouge2.f1, 2) + " | " +
               fixed(a.rouge->rougeL.f1, 2) + " | ";
    else
        out += "| n/a | n/a | n/a | ";
    out += opt(a.only_noun.mean_coco) + " | " + opt(a.noun_verb.mean_coco) + " |\n";
    out += "\ndocuments " + std::to_string(a.documents) + ", evaluated " + std::to_string(a.evaluated) + ", missing " +
           std::to_string(a.missing) + ", coco skipped " + std::to_string(a.only_noun.skipped) + " (noun) / " +
           std::to_string(a.noun_verb.skipped) + " (noun+verb)\n";
    return out;
}

// ---------------------------------------------------------------- cases

struct CaseBlock {
    std::string id;
    std::string relation; // serialized prompt line
    std::string gold;
    std::string without_relation;
    std::string with_relation;
    std::vector<std::string> keywords;
    std::size_t contained = 0;

    bool containment() const { return contained == keywords.size(); }
};

inline const std::set<std::string>& auxiliary_verbs() {
    static const std::set<std::string> aux = {"be",   "is",   "are",    "was",   "were",  "been", "being", "am",
                                              "has",  "have", "had",    "having", "do",   "does", "did",  "will",
                                              "would", "shall", "should", "can",  "could", "may",  "might", "must"};
    return aux;
}

// Content words of a relation: nouns, pronouns, numbers, adjectives and
// non-auxiliary verbs of its subject, relation and object.
inline std::vector<std::string> relation_keywords(const nlohmann::json& relation, const Annotator& annotator) {
    std::vector<std::string> out;
    for (const char* part : {"subject", "relation", "object"}) {
        const auto text = relation.value(part, std::string());
        for (const auto& a : annotator(text)) {
            const bool content = a.pos == PosTag::Noun || a.pos == PosTag::Pron || a.pos == PosTag::Num ||
                                 a.pos == PosTag::Adj || a.pos == PosTag::Adv ||
                                 (a.pos == PosTag::Verb && !auxiliary_verbs().contains(detail::to_lower(a.word.text)));
            if (content) out.push_back(a.word.text);
        }
    }
    return out;
}

// `ids` empty means every prompted document present in both runs, in corpus order.
inline std::vector<CaseBlock> cmd_cases(std::span<const Document> corpus, std::span<const Candidate> without,
                                        std::span<const Candidate> with, std::span<const std::string> ids,
                                        const Annotator& annotator) {
    std::unordered_map<std::string, std::string> g, g_rel;
    for (const auto& c : without) g[c.id] = c.summary;
    for (const auto& c : with) g_rel[c.id] = c.summary;
    std::unordered_map<std::string, const Document*> docs;
    for (const auto& d : corpus) docs[d.id] = &d;

    std::vector<std::string> chosen(ids.begin(), ids.end());
    if (chosen.empty()) {
        for (const auto& d : corpus)
            if (d.prompt && g.contains(d.id) && g_rel.contains(d.id)) chosen.push_back(d.id);
        if (chosen.empty()) throw DataError("the two runs share no prompted document ids");
    }

    std::vector<CaseBlock> out;
    for (const auto& id : chosen) {
        const auto d = docs.find(id);
        if (d == docs.end()) throw DataError("case id '" + id + "' is not in the corpus");
        if (!g.contains(id) || !g_rel.contains(id))
            throw DataError("case id '" + id + "' is missing from " + (g.contains(id) ? "the with-relation" : "the without-relation") + " run");
        const Document& doc = *d->second;
        if (!doc.prompt || !doc.extra.contains("relation")) throw DataError("case id '" + id + "' has no relation prompt");
        CaseBlock b{id, *doc.prompt, doc.target, g[id], g_rel[id], relation_keywords(doc.extra["relation"], annotator), 0};
        std::unordered_set<std::string> words;
        for (const auto& w : tokenize_words(b.with_relation)) words.insert(detail::to_lower(w.text));
        for (const auto& k : b.keywords)
            if (words.contains(detail::to_lower(k))) ++b.contained;
        out.push_back(std::move(b));
    }
    return out;
}

inline std::string cases_to_markdown(std::span<const CaseBlock> blocks) {
    auto cell = [](std::string_view s) {
        std::string o;
        for (const char ch : s) {
            if (ch == '|') o += "\\|";
            else if (ch == '\n' || ch == '\r') o += ' ';
            else o += ch;
        }
        return o;
    };
    std::string out;
    for (const auto& b : blocks) {
        out += "### " + cell(b.id) + "\n\n";
        out += "| | |\n|---|---|\n";
        out += "| Rel | " + cell(b.relation) + " |\n";
        out += "| Gold | " + cell(b.gold) + " |\n";
        out += "| No relation | " + cell(b.without_relation) + " |\n";
        out += "| With relation | " + cell(b.with_relation) + " |\n\n";
        out += "containment: " + std::string(b.containment() ? "true" : "false") + " (" + std::to_string(b.contained) +
               "/" + std::to_string(b.keywords.size()) + " relation keywords)\n\n";
    }
    return out;
}

} // namespace factsum
