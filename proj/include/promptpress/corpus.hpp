#pragma once

#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptpress {

/// Half-open byte range [begin, end) into a source string.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

/// A document as an ordered list of words plus the byte span each word
/// occupies in the source text. Words are maximal runs of non-whitespace
/// bytes; punctuation stays attached to its run ("resolutions." is one word).
struct WordSequence {
    std::vector<std::string> words;
    std::vector<Span> spans;
    std::size_t source_len = 0;

    std::size_t size() const { return words.size(); }
    bool empty() const { return words.empty(); }
};

inline bool is_space_byte(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

/// Split text into whitespace-delimited words. Multi-byte UTF-8 sequences
/// never contain ASCII whitespace bytes, so byte-level scanning is safe.
inline WordSequence split_words(std::string_view text) {
    WordSequence seq;
    seq.source_len = text.size();
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space_byte(text[i])) ++i;
        if (i >= text.size()) break;
        std::size_t start = i;
        while (i < text.size() && !is_space_byte(text[i])) ++i;
        seq.words.emplace_back(text.substr(start, i - start));
        seq.spans.push_back({start, i});
    }
    return seq;
}

/// Join words with single spaces. Re-splitting the result yields the same
/// word list (split_words is idempotent under this join).
inline std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    std::size_t total = 0;
    for (const auto& w : words) total += w.size() + 1;
    out.reserve(total);
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += words[i];
    }
    return out;
}

/// One document's distillation output: the original text, the compressed
/// text (chunk outputs joined with single spaces), and the byte offsets of
/// the chunk seams in the original. Boundaries always start at 0 and end at
/// original.size(), partitioning the original exactly.
struct DistilledPair {
    std::string doc_id;
    std::string original;
    std::string compressed;
    std::vector<std::size_t> chunk_boundaries;
};

/// Original words plus a binary keep label per word. match_sources[i], when
/// set, is the index of the compressed word that first claimed original
/// word i.
struct AnnotatedExample {
    std::string doc_id;
    WordSequence original_words;
    std::vector<bool> labels;
    std::vector<std::optional<std::size_t>> match_sources;

    std::size_t true_count() const {
        std::size_t n = 0;
        for (bool b : labels) n += b ? 1 : 0;
        return n;
    }
};

}  // namespace promptpress
