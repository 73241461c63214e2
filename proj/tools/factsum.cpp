// factsum: relation prompts, sentence-extraction probes and ROUGE/CoCo evaluation.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 scorer or transport error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "factsum/harness.hpp"

namespace {

using namespace factsum;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kScorer = 3 };

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
    if (!out) throw DataError("write to '" + path + "' failed");
}

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags; // config key -> value given on the command line
};

// Registers a flag that stores into a RunConfig key.
void key_flag(CLI::App* app, Common& common, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [&common, key](const std::string& v) { common.flags[key] = v; }, help);
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_file, "key = value configuration file");
    app->add_option("--set", c.sets, "override one setting, key=value (repeatable)");
    key_flag(app, c, "-i,--input", "input", "input corpus (JSONL)");
    key_flag(app, c, "-o,--output", "output", "output path ('-' for stdout)");
    key_flag(app, c, "--vocab", "vocab", "BPE vocabulary (encoder.json)");
    key_flag(app, c, "--merges", "merges", "BPE merges (vocab.bpe)");
    key_flag(app, c, "--lexicon", "lexicon", "POS lexicon TSV");
    key_flag(app, c, "--gazetteer", "gazetteer", "NER gazetteer TSV");
    key_flag(app, c, "--workers", "workers", "worker threads");
    key_flag(app, c, "--seed", "seed", "random seed");
}

RunConfig resolve(const Common& c) {
    RunConfig cfg;
    if (!c.config_file.empty()) load_config(cfg, c.config_file);
    apply_environment(cfg);
    for (const auto& [k, v] : c.flags) apply_setting(cfg, k, v);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
        apply_setting(cfg, detail::trim(std::string_view(s).substr(0, eq)), std::string_view(s).substr(eq + 1));
    }
    validate(cfg);
    return cfg;
}

std::vector<Document> require_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw UsageError("no input corpus given (--input)");
    return ingest_jsonl(cfg.input);
}

std::vector<std::string> split_ids(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        const auto id = detail::trim(std::string_view(s).substr(start, comma - start));
        if (!id.empty()) out.emplace_back(id);
        start = comma + 1;
    }
    return out;
}

std::string read_text_arg(const std::string& value) {
    if (value.size() > 1 && value.front() == '@') return detail::read_file(value.substr(1));
    return value;
}

std::string rouge_json(const RougeSet& s, double scale) {
    nlohmann::ordered_json j;
    for (auto [name, r] : {std::pair{"rouge1", &s.rouge1}, {"rouge2", &s.rouge2}, {"rougeL", &s.rougeL}})
        j[name] = {{"precision", r->precision * scale}, {"recall", r->recall * scale}, {"f1", r->f1 * scale}};
    return j.dump(2) + "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relation prompts, sentence-extraction probes and ROUGE/CoCo evaluation for summarisation corpora"};
    app.require_subcommand(1);

    Common prompt_c, senex_c, eval_c, cases_c, rouge_c, coco_c;

    auto* prompt = app.add_subcommand("prompt", "prepend the key relation of each document as a prompt line");
    add_common(prompt, prompt_c);
    key_flag(prompt, prompt_c, "--relation-source", "relation_source", "source_text or target_text");
    key_flag(prompt, prompt_c, "--whitelist", "whitelist", "comma-separated NER tags a relation must mention");
    key_flag(prompt, prompt_c, "--length-limit", "length_limit", "max source+prompt+target length");
    key_flag(prompt, prompt_c, "--length-unit", "length_unit", "words or bpe");

    auto* senex = app.add_subcommand("senex", "build a first-sentence extraction probe set");
    add_common(senex, senex_c);
    std::string senex_mode = "senex1";
    std::string skip_report;
    senex->add_option("--mode", senex_mode, "senex1, senex2 or senex3")->capture_default_str();
    senex->add_option("--skip-report", skip_report, "where to write skipped ids (JSONL)");

    auto* eval = app.add_subcommand("eval", "score candidate summaries with ROUGE and CoCo");
    add_common(eval, eval_c);
    std::string candidates_path, csv_path;
    eval->add_option("-c,--candidates", candidates_path, "candidate summaries, {\"id\", \"summary\"} per line")->required();
    eval->add_option("--csv", csv_path, "also write per-document rows as CSV");
    key_flag(eval, eval_c, "--scorer", "scorer", "builtin or remote");
    key_flag(eval, eval_c, "--endpoint", "endpoint", "remote scorer URL");
    key_flag(eval, eval_c, "--timeout-ms", "timeout_ms", "remote scorer timeout");
    key_flag(eval, eval_c, "--alpha", "alpha", "built-in scorer smoothing");

    auto* cases = app.add_subcommand("cases", "side-by-side case table for runs without and with relation prompts");
    add_common(cases, cases_c);
    std::string without_path, with_path, ids_arg;
    cases->add_option("--without", without_path, "summaries generated without prompts")->required();
    cases->add_option("--with", with_path, "summaries generated with prompts")->required();
    cases->add_option("--ids", ids_arg, "comma-separated ids, in the order to show");

    auto* rouge = app.add_subcommand("rouge", "ROUGE-1/2/L of one pair or of candidates against corpus targets");
    add_common(rouge, rouge_c);
    std::string rouge_candidate, rouge_reference, rouge_candidates;
    rouge->add_option("--candidate", rouge_candidate, "candidate text (or @file)");
    rouge->add_option("--reference", rouge_reference, "reference text (or @file)");
    rouge->add_option("-c,--candidates", rouge_candidates, "candidate JSONL scored against --input targets");
    key_flag(rouge, rouge_c, "--stem", "rouge_stem", "Porter-stem tokens longer than 3 characters");
    key_flag(rouge, rouge_c, "--stopwords", "rouge_stopwords", "drop stopwords");

    auto* coco = app.add_subcommand("coco", "CoCo of one summary against one source");
    add_common(coco, coco_c);
    std::string coco_source, coco_summary;
    coco->add_option("--source", coco_source, "source text (or @file)")->required();
    coco->add_option("--summary", coco_summary, "summary text (or @file)")->required();
    key_flag(coco, coco_c, "--policy", "keyword_policy", "noun, noun_verb, pos:TAGS or ner:TAGS");
    key_flag(coco, coco_c, "--scorer", "scorer", "builtin or remote");
    key_flag(coco, coco_c, "--endpoint", "endpoint", "remote scorer URL");
    key_flag(coco, coco_c, "--timeout-ms", "timeout_ms", "remote scorer timeout");
    key_flag(coco, coco_c, "--alpha", "alpha", "built-in scorer smoothing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (prompt->parsed()) {
            const auto cfg = resolve(prompt_c);
            const auto docs = require_input(cfg);
            const auto annotator = load_annotator(cfg);
            std::optional<Vocabulary> vocab;
            if (cfg.length_unit == "bpe") vocab = load_vocabulary(cfg.vocab, cfg.merges);
            const auto run = cmd_prompt(docs, cfg, annotator, vocab ? &*vocab : nullptr);
            write_output(cfg.output, write_jsonl(run.documents));
            std::cerr << "prompted " << run.prompted << ", unprompted " << run.unprompted << ", dropped by length "
                      << run.dropped.size() << "\n";
        } else if (senex->parsed()) {
            const auto cfg = resolve(senex_c);
            const auto docs = require_input(cfg);
            const auto vocab = load_vocabulary(cfg.vocab, cfg.merges);
            const auto set = build_senex_dataset(docs, parse_senex_mode(senex_mode), cfg.seed, vocab);
            write_output(cfg.output, write_jsonl(set.documents));
            if (!skip_report.empty()) write_output(skip_report, write_skip_report(set.skipped));
            std::cerr << "kept " << set.documents.size() << ", skipped " << set.skipped.size() << "\n";
        } else if (eval->parsed()) {
            const auto cfg = resolve(eval_c);
            const auto docs = require_input(cfg);
            const auto candidates = load_candidates(candidates_path);
            const auto vocab = load_vocabulary(cfg.vocab, cfg.merges);
            const auto annotator = load_annotator(cfg);
            const auto scorer = make_scorer(scorer_handle(cfg), vocab);
            const auto report = cmd_eval(docs, candidates, cfg, *scorer, annotator, vocab.fingerprint());
            write_output(cfg.output, report_to_json(report).dump(2) + "\n");
            if (!csv_path.empty()) write_output(csv_path, report_to_csv(report));
            (cfg.output.empty() || cfg.output == "-" ? std::cerr : std::cout) << report_summary(report);
        } else if (cases->parsed()) {
            const auto cfg = resolve(cases_c);
            const auto docs = require_input(cfg);
            const auto annotator = load_annotator(cfg);
            const auto without = load_candidates(without_path);
            const auto with = load_candidates(with_path);
            const auto ids = split_ids(ids_arg);
            const auto blocks = cmd_cases(docs, without, with, ids, annotator);
            write_output(cfg.output, cases_to_markdown(blocks));
        } else if (rouge->parsed()) {
            const auto cfg = resolve(rouge_c);
            const auto opts = rouge_options(cfg);
            if (!rouge_candidates.empty()) {
                const auto docs = require_input(cfg);
                std::map<std::string, const Document*> by_id;
                for (const auto& d : docs) by_id[d.id] = &d;
                std::vector<std::pair<std::string, std::string>> pairs;
                for (const auto& c : load_candidates(rouge_candidates)) {
                    const auto it = by_id.find(c.id);
                    if (it == by_id.end()) throw DataError("candidate id '" + c.id + "' is not in the corpus");
                    pairs.emplace_back(c.summary, it->second->target);
                }
                write_output(cfg.output, rouge_json(corpus_rouge(pairs, opts), 1.0));
            } else {
                if (rouge_candidate.empty() && rouge_reference.empty())
                    throw UsageError("give --candidate and --reference, or --candidates with --input");
                write_output(cfg.output, rouge_json(rouge_all(read_text_arg(rouge_candidate),
                                                               read_text_arg(rouge_reference), opts),
                                                    100.0));
            }
        } else if (coco->parsed()) {
            const auto cfg = resolve(coco_c);
            const auto vocab = load_vocabulary(cfg.vocab, cfg.merges);
            const auto annotator = load_annotator(cfg);
            const auto scorer = make_scorer(scorer_handle(cfg), vocab);
            const auto policy = KeywordPolicy::parse(cfg.keyword_policy);
            const auto r = coco_score(*scorer, read_text_arg(coco_source), read_text_arg(coco_summary), policy, annotator);
            nlohmann::ordered_json j;
            j["coco"] = r.coco;
            j["n"] = r.n;
            j["score_x_mean"] = r.score_x_mean;
            j["score_m_mean"] = r.score_m_mean;
            j["masked_source"] = r.masked.text;
            j["keywords"] = nlohmann::ordered_json::array();
            for (const auto& k : r.keywords)
                j["keywords"].push_back({{"word", k.word},
                                         {"first_token", k.first_token},
                                         {"score_x", k.score_x},
                                         {"score_m", k.score_m}});
            j["dropped"] = r.dropped;
            j["policy"] = policy.name();
            j["model_id"] = r.model_id;
            write_output(cfg.output, j.dump(2) + "\n");
        }
    } catch (const UsageError& e) {
        std::cerr << "factsum: " << e.what() << "\n";
        return kUsage;
    } catch (const ScorerError& e) {
        std::cerr << "factsum: scorer: " << e.what() << "\n";
        return kScorer;
    } catch (const std::exception& e) {
        std::cerr << "factsum: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}
