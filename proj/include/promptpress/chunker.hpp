#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "promptpress/corpus.hpp"
#include "promptpress/errors.hpp"

namespace promptpress {

/// Counts tokens in a piece of text. The default counts whitespace-delimited
/// words; a BPE-accurate counter can be injected in its place.
using TokenCounter = std::function<std::size_t(std::string_view)>;

inline std::size_t count_words(std::string_view text) {
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space_byte(text[i])) ++i;
        if (i >= text.size()) break;
        ++n;
        while (i < text.size() && !is_space_byte(text[i])) ++i;
    }
    return n;
}

inline TokenCounter word_token_counter() {
    return [](std::string_view text) { return count_words(text); };
}

inline std::size_t count_tokens(std::string_view text, const TokenCounter& counter = {}) {
    return counter ? counter(text) : count_words(text);
}

/// One segment of a document, at most max_tokens long unless it is a
/// fragment of a single oversize sentence (then oversize_split is set).
struct Chunk {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;
    std::size_t token_count = 0;
    bool oversize_split = false;
};

namespace detail {

inline bool is_sentence_terminator(char c) {
    return c == '.' || c == '!' || c == '?';
}

// Consumes closing quotes/brackets after a terminator: ASCII " ' ) ] plus
// UTF-8 right curly quotes and guillemet.
inline std::size_t skip_closing_quotes(std::string_view text, std::size_t pos) {
    while (pos < text.size()) {
        char c = text[pos];
        if (c == '"' || c == '\'' || c == ')' || c == ']') {
            ++pos;
            continue;
        }
        if (pos + 2 < text.size() && static_cast<unsigned char>(c) == 0xE2 &&
            static_cast<unsigned char>(text[pos + 1]) == 0x80) {
            unsigned char b3 = static_cast<unsigned char>(text[pos + 2]);
            if (b3 == 0x99 || b3 == 0x9D) {  // ’ ”
                pos += 3;
                continue;
            }
        }
        if (pos + 1 < text.size() && static_cast<unsigned char>(c) == 0xC2 &&
            static_cast<unsigned char>(text[pos + 1]) == 0xBB) {  // »
            pos += 2;
            continue;
        }
        break;
    }
    return pos;
}

}  // namespace detail

/// Sentence units partition `text` exactly. A unit ends just after a
/// terminator (plus any closing quotes) that is followed by whitespace or
/// end-of-text; the whitespace itself opens the next unit. The last unit may
/// lack a terminator.
inline std::vector<Span> sentence_units(std::string_view text) {
    std::vector<Span> units;
    std::size_t begin = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (detail::is_sentence_terminator(text[i])) {
            std::size_t end = detail::skip_closing_quotes(text, i + 1);
            if (end >= text.size() || is_space_byte(text[end])) {
                units.push_back({begin, end});
                begin = end;
                i = end;
                continue;
            }
            i = end;
            continue;
        }
        ++i;
    }
    if (begin < text.size()) units.push_back({begin, text.size()});
    return units;
}

/// Number of sentences in `text` (units that contain at least one word).
inline std::size_t count_sentences(std::string_view text) {
    std::size_t n = 0;
    for (const Span& u : sentence_units(text)) {
        if (count_words(text.substr(u.begin, u.end - u.begin)) > 0) ++n;
    }
    return n;
}

namespace detail {

// Largest word-boundary prefix of text[0, limit_end) whose token count stays
// within budget; always advances past at least one word. Returns the byte
// offset just after the last included word.
inline std::size_t prefix_end_under_budget(std::string_view text, std::size_t max_tokens,
                                           const TokenCounter& counter) {
    WordSequence words = split_words(text);
    if (words.empty()) return text.size();
    std::size_t lo = 0;  // highest word index known to fit
    std::size_t hi = words.size() - 1;
    if (count_tokens(text.substr(0, words.spans[hi].end), counter) <= max_tokens) {
        return words.spans[hi].end;
    }
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo + 1) / 2;
        if (count_tokens(text.substr(0, words.spans[mid].end), counter) <= max_tokens) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return words.spans[lo].end;
}

}  // namespace detail

/// Truncate to the largest word-boundary prefix within the token budget.
inline std::string_view truncate_to_tokens(std::string_view text, std::size_t max_tokens,
                                           const TokenCounter& counter = {}) {
    if (count_tokens(text, counter) <= max_tokens) return text;
    return text.substr(0, detail::prefix_end_under_budget(text, max_tokens, counter));
}

/// Segment text into sentence-aligned chunks of at most max_tokens each,
/// packing greedily. A single sentence over budget is hard-split at word
/// boundaries and every fragment flagged. Concatenating the chunk texts
/// reproduces the input byte-for-byte.
inline std::vector<Chunk> chunk(std::string_view text, std::size_t max_tokens = 512,
                                const TokenCounter& counter = {}, std::string doc_id = {}) {
    if (max_tokens < 1) throw ConfigError("chunk: max_tokens must be >= 1");
    std::vector<Chunk> chunks;
    auto emit = [&](std::size_t begin, std::size_t end, bool flagged) {
        std::string_view piece = text.substr(begin, end - begin);
        Chunk c;
        c.doc_id = doc_id;
        c.index = chunks.size();
        c.text = std::string(piece);
        c.token_count = count_tokens(piece, counter);
        c.oversize_split = flagged;
        chunks.push_back(std::move(c));
    };
    auto emit_hard_split = [&](const Span& unit) {
        std::size_t pos = unit.begin;
        while (pos < unit.end) {
            std::string_view rest = text.substr(pos, unit.end - pos);
            if (count_tokens(rest, counter) <= max_tokens) {
                emit(pos, unit.end, true);
                break;
            }
            std::size_t cut = detail::prefix_end_under_budget(rest, max_tokens, counter);
            emit(pos, pos + cut, true);
            pos += cut;
        }
    };

    bool open = false;
    std::size_t cur_begin = 0;
    std::size_t cur_end = 0;
    for (const Span& unit : sentence_units(text)) {
        if (open) {
            std::string_view extended = text.substr(cur_begin, unit.end - cur_begin);
            if (count_tokens(extended, counter) <= max_tokens) {
                cur_end = unit.end;
                continue;
            }
            emit(cur_begin, cur_end, false);
            open = false;
        }
        std::string_view unit_text = text.substr(unit.begin, unit.end - unit.begin);
        if (count_tokens(unit_text, counter) > max_tokens) {
            emit_hard_split(unit);
        } else {
            open = true;
            cur_begin = unit.begin;
            cur_end = unit.end;
        }
    }
    if (open) emit(cur_begin, cur_end, false);
    return chunks;
}

}  // namespace promptpress
