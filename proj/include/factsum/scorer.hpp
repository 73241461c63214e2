#pragma once

// Token log-probability backends. A scorer returns one log-probability per
// token of `target`, conditioned on `context` (and, for neural backends, on
// the gold target prefix).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "factsum/bpe.hpp"
#include "factsum/detail/text.hpp"
#include "factsum/errors.hpp"

namespace factsum {

inline constexpr std::string_view kMaskToken = "<mask>";

struct ScoreRequest {
    std::string context;
    std::string target;
};

struct ScoreResponse {
    std::vector<std::string> tokens;
    std::vector<double> logprobs;
    std::string model_id;
};

inline void to_json(nlohmann::json& j, const ScoreRequest& r) { j = {{"context", r.context}, {"target", r.target}}; }

inline void to_json(nlohmann::json& j, const ScoreResponse& r) {
    j = {{"tokens", r.tokens}, {"logprobs", r.logprobs}, {"model_id", r.model_id}};
}

// Throws ProtocolError naming the first violated invariant.
inline void validate_response(const ScoreResponse& r, bool normalized = true) {
    if (r.tokens.size() != r.logprobs.size())
        throw ProtocolError("arity mismatch: " + std::to_string(r.tokens.size()) + " tokens but " +
                            std::to_string(r.logprobs.size()) + " logprobs");
    for (std::size_t i = 0; i < r.logprobs.size(); ++i) {
        if (!std::isfinite(r.logprobs[i]))
            throw ProtocolError("logprob " + std::to_string(i) + " is not finite");
        if (normalized && r.logprobs[i] > 1e-9)
            throw ProtocolError("logprob " + std::to_string(i) + " is positive for a normalized backend");
    }
}

inline ScoreResponse parse_score_response(std::string_view body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) { // syntax errors and out-of-range numbers
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("response is not a JSON object");
    ScoreResponse r;
    try {
        r.tokens = j.at("tokens").get<std::vector<std::string>>();
        r.logprobs = j.at("logprobs").get<std::vector<double>>();
        r.model_id = j.at("model_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("response fields: ") + e.what());
    }
    return r;
}

class Scorer {
public:
    virtual ~Scorer() = default;
    virtual ScoreResponse score(const ScoreRequest& request) const = 0;
    virtual std::string model_id() const = 0;
};

struct BuiltinScorerConfig {
    double alpha = 1.0;
    std::string mask_token{kMaskToken};
};

namespace scorer_detail {

inline constexpr TokenId kMaskId = -1;

// BPE ids of a context in which every mask literal is one atomic token and
// swallows the whitespace right before it.
inline std::vector<TokenId> context_tokens(const Vocabulary& vocab, std::string_view context,
                                           std::string_view mask_token) {
    std::vector<TokenId> ids;
    auto add_text = [&](std::string_view seg) {
        for (const auto& t : encode(vocab, seg)) ids.push_back(t.id);
    };
    std::size_t pos = 0;
    while (pos <= context.size()) {
        const auto hit = mask_token.empty() ? std::string_view::npos : context.find(mask_token, pos);
        if (hit == std::string_view::npos) {
            add_text(context.substr(pos));
            break;
        }
        std::size_t seg_end = hit;
        while (seg_end > pos && detail::is_ascii_space(context[seg_end - 1])) --seg_end;
        add_text(context.substr(pos, seg_end - pos));
        ids.push_back(kMaskId);
        pos = hit + mask_token.size();
    }
    return ids;
}

} // namespace scorer_detail

// Position-independent unigram model over the context's BPE tokens:
//   logprob(t) = log((count(t in context) + alpha) / (|context| + alpha * V))
// with V the number of distinct tokens in context, target and {mask}.
inline ScoreResponse builtin_score(const BuiltinScorerConfig& config, std::string_view context,
                                   std::string_view target, const Vocabulary& vocab) {
    const auto ctx = scorer_detail::context_tokens(vocab, context, config.mask_token);
    const auto tgt = encode(vocab, target);

    std::unordered_map<TokenId, std::size_t> counts;
    for (const auto id : ctx) ++counts[id];
    std::unordered_set<TokenId> distinct;
    distinct.insert(scorer_detail::kMaskId);
    for (const auto& [id, c] : counts) distinct.insert(id);
    for (const auto& t : tgt) distinct.insert(t.id);

    const double denom = static_cast<double>(ctx.size()) + config.alpha * static_cast<double>(distinct.size());
    ScoreResponse r;
    r.model_id = "builtin-unigram(alpha=" + std::to_string(config.alpha) + ")";
    r.tokens.reserve(tgt.size());
    r.logprobs.reserve(tgt.size());
    for (const auto& t : tgt) {
        const auto it = counts.find(t.id);
        const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        r.tokens.push_back(t.text);
        r.logprobs.push_back(std::log((c + config.alpha) / denom));
    }
    return r;
}

class BuiltinScorer final : public Scorer {
public:
    BuiltinScorer(const Vocabulary& vocab, BuiltinScorerConfig config = {}) : vocab_(&vocab), config_(std::move(config)) {}

    ScoreResponse score(const ScoreRequest& request) const override {
        return builtin_score(config_, request.context, request.target, *vocab_);
    }

    std::string model_id() const override { return "builtin-unigram(alpha=" + std::to_string(config_.alpha) + ")"; }

private:
    const Vocabulary* vocab_;
    BuiltinScorerConfig config_;
};

struct RemoteScorerConfig {
    std::string endpoint; // http://host:port[/prefix]
    std::chrono::milliseconds timeout{30000};
    std::size_t max_in_flight = 4;
    bool normalized = true;
};

// HTTP JSON client:
//   POST {prefix}/score  {"context", "target"} -> {"tokens", "logprobs", "model_id"}
//   GET  {prefix}/health -> {"status": "ok"}
class RemoteScorer final : public Scorer {
public:
    static constexpr std::size_t kMaxInFlight = 256;

    explicit RemoteScorer(RemoteScorerConfig config)
        : config_(std::move(config)),
          slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_in_flight, 1, kMaxInFlight))) {
        if (config_.timeout.count() <= 0) throw UsageError("remote scorer timeout must be > 0");
        const auto scheme = config_.endpoint.find("://");
        if (scheme == std::string::npos || config_.endpoint.substr(0, scheme) != "http")
            throw UsageError("remote scorer endpoint must be an http:// URL: '" + config_.endpoint + "'");
        const auto slash = config_.endpoint.find('/', scheme + 3);
        base_ = config_.endpoint.substr(0, slash);
        if (slash != std::string::npos) prefix_ = config_.endpoint.substr(slash);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }

    ScoreResponse score(const ScoreRequest& request) const override {
        const nlohmann::json body = request;
        auto res = send([&](httplib::Client& cli) {
            return cli.Post(prefix_ + "/score", body.dump(), "application/json");
        });
        auto parsed = parse_score_response(res.body);
        validate_response(parsed, config_.normalized);
        {
            std::lock_guard lock(mutex_);
            last_model_id_ = parsed.model_id;
        }
        return parsed;
    }

    // True when /health answers {"status": "ok"}.
    bool healthy() const {
        auto res = send([&](httplib::Client& cli) { return cli.Get(prefix_ + "/health"); });
        try {
            return nlohmann::json::parse(res.body).value("status", "") == "ok";
        } catch (const nlohmann::json::exception&) {
            return false;
        }
    }

    std::string model_id() const override {
        std::lock_guard lock(mutex_);
        return last_model_id_.empty() ? "remote:" + config_.endpoint : last_model_id_;
    }

private:
    template <typename Call>
    httplib::Response send(Call call) const {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<kMaxInFlight>& s;
            ~Release() { s.release(); }
        } release{slots_};

        httplib::Client cli(base_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
        cli.set_connection_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
        cli.set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
        cli.set_write_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
        auto res = call(cli);
        if (!res) throw TransportError("scorer at " + config_.endpoint + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw BackendError(res->status, "scorer at " + config_.endpoint + " returned HTTP " +
                                                std::to_string(res->status) + ": " + res->body.substr(0, 200));
        return *res;
    }

    RemoteScorerConfig config_;
    std::string base_;
    std::string prefix_;
    mutable std::counting_semaphore<kMaxInFlight> slots_;
    mutable std::mutex mutex_;
    mutable std::string last_model_id_;
};

// Exactly one backend is configured.
using ScorerHandle = std::variant<BuiltinScorerConfig, RemoteScorerConfig>;

inline std::unique_ptr<Scorer> make_scorer(const ScorerHandle& handle, const Vocabulary& vocab) {
    if (const auto* b = std::get_if<BuiltinScorerConfig>(&handle)) return std::make_unique<BuiltinScorer>(vocab, *b);
    return std::make_unique<RemoteScorer>(std::get<RemoteScorerConfig>(handle));
}

} // namespace factsum
