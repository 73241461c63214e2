#pragma once

// Byte-level BPE compatible with GPT-2 encoder.json / vocab.bpe files.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "factsum/detail/text.hpp"
#include "factsum/detail/unicode.hpp"
#include "factsum/errors.hpp"

namespace factsum {

using TokenId = std::int32_t;

struct ByteSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
    bool operator==(const ByteSpan&) const = default;
};

// `text` holds the raw bytes the token stands for (" president"), not the
// byte-encoded vocabulary symbol ("Ġpresident").
struct Token {
    std::string text;
    TokenId id = 0;
    ByteSpan span;
    bool operator==(const Token&) const = default;
};

using TokenSequence = std::vector<Token>;

namespace bpe_detail {

// GPT-2's reversible byte -> printable code point table.
inline const std::array<std::uint32_t, 256>& byte_to_codepoint() {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        std::array<bool, 256> direct{};
        for (int b = '!'; b <= '~'; ++b) direct[static_cast<std::size_t>(b)] = true;
        for (int b = 0xA1; b <= 0xAC; ++b) direct[static_cast<std::size_t>(b)] = true;
        for (int b = 0xAE; b <= 0xFF; ++b) direct[static_cast<std::size_t>(b)] = true;
        std::uint32_t next = 256;
        for (std::size_t b = 0; b < 256; ++b) t[b] = direct[b] ? static_cast<std::uint32_t>(b) : next++;
        return t;
    }();
    return table;
}

inline const std::array<std::string, 256>& byte_symbols() {
    static const std::array<std::string, 256> symbols = [] {
        std::array<std::string, 256> s;
        for (std::size_t b = 0; b < 256; ++b) detail::append_utf8(s[b], byte_to_codepoint()[b]);
        return s;
    }();
    return symbols;
}

inline const std::unordered_map<std::uint32_t, unsigned char>& codepoint_to_byte() {
    static const auto table = [] {
        std::unordered_map<std::uint32_t, unsigned char> m;
        for (std::size_t b = 0; b < 256; ++b) m.emplace(byte_to_codepoint()[b], static_cast<unsigned char>(b));
        return m;
    }();
    return table;
}

// Maps a vocabulary symbol back to the bytes it encodes. Code points outside
// the byte table (special tokens written verbatim) are kept as UTF-8.
inline std::string symbol_to_bytes(std::string_view symbol) {
    std::string out;
    const auto& table = codepoint_to_byte();
    std::size_t pos = 0;
    while (pos < symbol.size()) {
        const auto cp = detail::decode_utf8(symbol, pos);
        if (cp.value >= 0) {
            if (auto it = table.find(static_cast<std::uint32_t>(cp.value)); it != table.end()) {
                out += static_cast<char>(it->second);
                pos += cp.length;
                continue;
            }
        }
        out.append(symbol.substr(pos, cp.length));
        pos += cp.length;
    }
    return out;
}

inline std::uint64_t pair_key(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

} // namespace bpe_detail

// Splits text the way GPT-2's pre-tokenizer regex does:
//   's|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+
// Returned pieces are contiguous and cover the input.
inline std::vector<ByteSpan> pretokenize(std::string_view text) {
    using detail::is_letter;
    using detail::is_number;
    using detail::is_space;
    std::vector<ByteSpan> pieces;
    const std::size_t n = text.size();

    auto cp_at = [&](std::size_t pos) { return detail::decode_utf8(text, pos); };
    auto run = [&](std::size_t pos, auto pred) {
        while (pos < n) {
            const auto cp = cp_at(pos);
            if (!pred(cp.value)) break;
            pos += cp.length;
        }
        return pos;
    };
    auto is_other = [](std::int32_t c) { return !is_space(c) && !is_letter(c) && !is_number(c); };

    std::size_t pos = 0;
    while (pos < n) {
        std::size_t end = pos;
        if (text[pos] == '\'') {
            for (std::string_view suffix : {"s", "t", "re", "ve", "m", "ll", "d"}) {
                if (text.substr(pos + 1, suffix.size()) == suffix) {
                    end = pos + 1 + suffix.size();
                    break;
                }
            }
        }
        if (end == pos) {
            const std::size_t body = (text[pos] == ' ' && pos + 1 < n) ? pos + 1 : pos;
            const auto first = cp_at(body).value;
            if (is_letter(first)) end = run(body, is_letter);
            else if (is_number(first)) end = run(body, is_number);
            else if (is_other(first)) end = run(body, is_other);
        }
        if (end == pos) {
            // Whitespace run; leave the final space to prefix the next word.
            std::size_t last_start = pos;
            std::size_t scan = pos;
            while (scan < n) {
                const auto cp = cp_at(scan);
                if (!is_space(cp.value)) break;
                last_start = scan;
                scan += cp.length;
            }
            end = scan;
            if (scan < n && last_start > pos) end = last_start;
        }
        pieces.push_back({pos, end});
        pos = end;
    }
    return pieces;
}

// Immutable after construction; safe to share across threads.
class Vocabulary {
public:
    struct Merge {
        std::uint32_t rank;
        TokenId result;
    };

    static Vocabulary from_strings(std::string_view vocab_json, std::string_view merges_text,
                                   const std::string& vocab_name = "<vocab>",
                                   const std::string& merges_name = "<merges>") {
        Vocabulary v;
        v.load_tokens(vocab_json, vocab_name);
        v.load_merges(merges_text, merges_name);
        detail::Fnv1a h;
        h.update(vocab_json);
        h.update(std::string_view("\0", 1));
        h.update(merges_text);
        v.fingerprint_ = h.hex();
        return v;
    }

    std::size_t size() const { return token_to_id_.size(); }
    std::size_t merge_count() const { return merges_.size(); }
    const std::string& fingerprint() const { return fingerprint_; }

    std::optional<TokenId> id_of(std::string_view symbol) const {
        if (auto it = token_to_id_.find(std::string(symbol)); it != token_to_id_.end()) return it->second;
        return std::nullopt;
    }

    bool contains(TokenId id) const {
        return id >= 0 && static_cast<std::size_t>(id) < present_.size() && present_[static_cast<std::size_t>(id)];
    }

    const std::string& symbol_of(TokenId id) const {
        if (!contains(id)) throw LookupError("token id " + std::to_string(id) + " is not in the vocabulary");
        return symbols_[static_cast<std::size_t>(id)];
    }

    const std::string& bytes_of(TokenId id) const {
        if (!contains(id)) throw LookupError("token id " + std::to_string(id) + " is not in the vocabulary");
        return bytes_[static_cast<std::size_t>(id)];
    }

    TokenId byte_token(unsigned char b) const { return byte_ids_[b]; }

    std::optional<Merge> merge_of(TokenId left, TokenId right) const {
        if (auto it = merges_.find(bpe_detail::pair_key(left, right)); it != merges_.end()) return it->second;
        return std::nullopt;
    }

private:
    // Largest id accepted; keeps a corrupt file from requesting a huge table.
    static constexpr std::int64_t kMaxId = 16 * 1024 * 1024;

    void load_tokens(std::string_view json_text, const std::string& name) {
        std::unordered_set<std::string> seen;
        std::string duplicate;
        nlohmann::json::parser_callback_t cb = [&](int depth, nlohmann::json::parse_event_t event,
                                                   nlohmann::json& parsed) {
            if (event == nlohmann::json::parse_event_t::key && depth == 1 && duplicate.empty()) {
                auto key = parsed.get<std::string>();
                if (!seen.insert(key).second) duplicate = std::move(key);
            }
            return true;
        };
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(json_text.begin(), json_text.end(), cb);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(name, 0, std::string("invalid JSON: ") + e.what());
        }
        if (!duplicate.empty()) throw IntegrityError(name + ": duplicate token '" + duplicate + "'");
        if (!doc.is_object()) throw ParseError(name, 0, "expected a JSON object of token -> id");

        std::int64_t max_id = -1;
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (!it.value().is_number_integer())
                throw ParseError(name, 0, "id of token '" + it.key() + "' is not an integer");
            const auto id = it.value().get<std::int64_t>();
            if (id < 0 || id > kMaxId) throw ParseError(name, 0, "id of token '" + it.key() + "' out of range");
            max_id = std::max(max_id, id);
        }
        const auto table_size = static_cast<std::size_t>(max_id + 1);
        symbols_.assign(table_size, {});
        bytes_.assign(table_size, {});
        present_.assign(table_size, false);
        token_to_id_.reserve(doc.size());
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const auto id = it.value().get<TokenId>();
            const auto slot = static_cast<std::size_t>(id);
            if (present_[slot])
                throw IntegrityError(name + ": id " + std::to_string(id) + " assigned to both '" + symbols_[slot] +
                                     "' and '" + it.key() + "'");
            present_[slot] = true;
            symbols_[slot] = it.key();
            bytes_[slot] = bpe_detail::symbol_to_bytes(it.key());
            token_to_id_.emplace(it.key(), id);
        }
        for (std::size_t b = 0; b < 256; ++b) {
            auto id = id_of(bpe_detail::byte_symbols()[b]);
            if (!id) throw IntegrityError(name + ": no token for byte " + std::to_string(b));
            byte_ids_[b] = *id;
        }
    }

    void load_merges(std::string_view text, const std::string& name) {
        std::unordered_set<std::string> producible(bpe_detail::byte_symbols().begin(), bpe_detail::byte_symbols().end());
        const auto lines = detail::split_lines(text);
        std::uint32_t rank = 0;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto line = lines[i];
            const std::size_t lineno = i + 1;
            if (line.empty()) continue;
            if (i == 0 && line.starts_with("#version")) continue;
            const auto sp = line.find(' ');
            if (sp == std::string_view::npos || sp == 0 || sp + 1 == line.size() ||
                line.find(' ', sp + 1) != std::string_view::npos)
                throw ParseError(name, lineno, "expected two space-separated symbols");
            const std::string left(line.substr(0, sp));
            const std::string right(line.substr(sp + 1));
            for (const auto* sym : {&left, &right}) {
                if (!producible.contains(*sym))
                    throw IntegrityError(name + ":" + std::to_string(lineno) + ": symbol '" + *sym +
                                         "' is not produced by any earlier merge");
            }
            const auto left_id = id_of(left);
            const auto right_id = id_of(right);
            const auto result_id = id_of(left + right);
            if (!left_id || !right_id || !result_id)
                throw IntegrityError(name + ":" + std::to_string(lineno) + ": merge result '" + left + right +
                                     "' is not in the vocabulary");
            if (!merges_.emplace(bpe_detail::pair_key(*left_id, *right_id), Merge{rank, *result_id}).second)
                throw IntegrityError(name + ":" + std::to_string(lineno) + ": duplicate merge '" + left + " " +
                                     right + "'");
            producible.insert(left + right);
            ++rank;
        }
    }

    std::unordered_map<std::string, TokenId> token_to_id_;
    std::vector<std::string> symbols_;
    std::vector<std::string> bytes_;
    std::vector<bool> present_;
    std::array<TokenId, 256> byte_ids_{};
    std::unordered_map<std::uint64_t, Merge> merges_;
    std::string fingerprint_;
};

inline Vocabulary load_vocabulary(const std::string& vocab_path, const std::string& merges_path) {
    return Vocabulary::from_strings(detail::read_file(vocab_path), detail::read_file(merges_path), vocab_path,
                                    merges_path);
}

// Applies merges to one pre-token. At every step the adjacent pair with the
// lowest rank is merged at all of its non-overlapping occurrences, left to right.
inline std::vector<TokenId> merge_piece(const Vocabulary& vocab, std::string_view piece) {
    std::vector<TokenId> ids;
    ids.reserve(piece.size());
    for (const char c : piece) ids.push_back(vocab.byte_token(static_cast<unsigned char>(c)));

    std::vector<TokenId> next;
    while (ids.size() > 1) {
        std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
        TokenId best_left = 0, best_right = 0, best_result = 0;
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
            if (auto m = vocab.merge_of(ids[i], ids[i + 1]); m && m->rank < best_rank) {
                best_rank = m->rank;
                best_left = ids[i];
                best_right = ids[i + 1];
                best_result = m->result;
            }
        }
        if (best_rank == std::numeric_limits<std::uint32_t>::max()) break;
        next.clear();
        for (std::size_t i = 0; i < ids.size();) {
            if (i + 1 < ids.size() && ids[i] == best_left && ids[i + 1] == best_right) {
                next.push_back(best_result);
                i += 2;
            } else {
                next.push_back(ids[i++]);
            }
        }
        ids.swap(next);
    }
    return ids;
}

inline TokenSequence encode(const Vocabulary& vocab, std::string_view text) {
    TokenSequence out;
    for (const auto piece : pretokenize(text)) {
        std::size_t offset = piece.begin;
        for (const auto id : merge_piece(vocab, text.substr(piece.begin, piece.size()))) {
            const auto& bytes = vocab.bytes_of(id);
            out.push_back(Token{bytes, id, {offset, offset + bytes.size()}});
            offset += bytes.size();
        }
    }
    return out;
}

inline std::string decode(const Vocabulary& vocab, std::span<const TokenId> ids) {
    std::string out;
    for (const auto id : ids) out += vocab.bytes_of(id);
    return out;
}

inline std::string decode(const Vocabulary& vocab, const TokenSequence& seq) {
    std::string out;
    for (const auto& t : seq) out += vocab.bytes_of(t.id);
    return out;
}

// First token of `word` as it is tokenized after `context_prefix`; a preceding
// space is carried into the token (" president"), per GPT-2's convention.
inline std::string first_subtoken(const Vocabulary& vocab, std::string_view word, std::string_view context_prefix) {
    if (word.empty()) throw UsageError("first_subtoken: empty word");
    std::string text(context_prefix);
    text += word;
    for (auto& t : encode(vocab, text)) {
        if (t.span.end > context_prefix.size()) return std::move(t.text);
    }
    throw LookupError("first_subtoken: word produced no tokens");
}

} // namespace factsum
