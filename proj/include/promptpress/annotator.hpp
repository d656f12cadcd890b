#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "promptpress/corpus.hpp"
#include "promptpress/errors.hpp"

namespace promptpress {

/// How two words are compared during alignment.
enum class FuzzyMode {
    Exact,       ///< lowercase, punctuation-stripped equality
    Normalized,  ///< additionally strips inflection suffixes (default)
};

namespace detail {

inline bool is_ascii_punct(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return u < 128 && std::ispunct(u) != 0;
}

inline bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

}  // namespace detail

/// Lowercase and strip leading/trailing ASCII punctuation. Bytes outside
/// ASCII are left untouched.
inline std::string exact_key(std::string_view word) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && detail::is_ascii_punct(word[begin])) ++begin;
    while (end > begin && detail::is_ascii_punct(word[end - 1])) --end;
    std::string key;
    key.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(word[i]))));
    }
    return key;
}

/// Reduce a word to its match key: lowercase, strip surrounding punctuation,
/// then apply one suffix rule (first match wins):
///   "ies" -> "y", "es" -> "", "s" -> "" (word longer than 3), "ed" -> "",
///   "ing" -> "" (remaining stem at least 3 chars).
/// After "ed"/"ing" a trailing doubled consonant other than l/s/z is
/// undoubled, so "running" and "runs" meet at "run". Digits and symbols pass
/// through unchanged.
inline std::string normalize(std::string_view word) {
    std::string key = exact_key(word);
    auto ends_with = [&](std::string_view suffix) {
        return key.size() >= suffix.size() &&
               std::string_view(key).substr(key.size() - suffix.size()) == suffix;
    };
    auto undouble = [&] {
        if (key.size() >= 2) {
            char c = key[key.size() - 1];
            if (c == key[key.size() - 2] && std::isalpha(static_cast<unsigned char>(c)) &&
                !detail::is_vowel(c) && c != 'l' && c != 's' && c != 'z') {
                key.pop_back();
            }
        }
    };
    if (ends_with("ies")) {
        key.replace(key.size() - 3, 3, "y");
    } else if (ends_with("es") && key.size() > 2) {
        key.erase(key.size() - 2);
    } else if (ends_with("s") && key.size() > 3) {
        key.pop_back();
    } else if (ends_with("ed") && key.size() > 2) {
        key.erase(key.size() - 2);
        undouble();
    } else if (ends_with("ing") && key.size() >= 6) {
        key.erase(key.size() - 3);
        undouble();
    }
    return key;
}

inline std::string match_key(std::string_view word, FuzzyMode mode) {
    return mode == FuzzyMode::Normalized ? normalize(word) : exact_key(word);
}

inline bool fuzzy_match(std::string_view a, std::string_view b,
                        FuzzyMode mode = FuzzyMode::Normalized) {
    return match_key(a, mode) == match_key(b, mode);
}

struct AnnotationParams {
    std::size_t window_size = 20;  ///< total window; s/2 in each direction
    FuzzyMode fuzzy = FuzzyMode::Normalized;

    void validate() const {
        if (window_size < 2 || window_size % 2 != 0) {
            throw ConfigError("annotate: window_size must be even and >= 2");
        }
    }
};

/// Bidirectional sliding-window alignment. Every original word starts
/// False. For each compressed word, offsets i = 1..s/2 probe position
/// prev+i (clamped to the last word) and then prev-i (clamped to the
/// first); the first match flips that label to True. Only a rightward match
/// advances prev, so a word matched behind the cursor (reordered output)
/// does not drag the search window backwards.
inline AnnotatedExample annotate(const WordSequence& original, const WordSequence& compressed,
                                 const AnnotationParams& params = {}, std::string doc_id = {}) {
    params.validate();
    AnnotatedExample ex;
    ex.doc_id = std::move(doc_id);
    ex.original_words = original;
    ex.labels.assign(original.size(), false);
    ex.match_sources.assign(original.size(), std::nullopt);
    if (original.empty() || compressed.empty()) return ex;

    std::vector<std::string> keys;
    keys.reserve(original.size());
    for (const auto& w : original.words) keys.push_back(match_key(w, params.fuzzy));

    const std::size_t n = original.size();  // positions are 1-based
    const std::size_t half = params.window_size / 2;
    std::size_t prev = 0;
    for (std::size_t ci = 0; ci < compressed.size(); ++ci) {
        const std::string key = match_key(compressed.words[ci], params.fuzzy);
        for (std::size_t i = 1; i <= half; ++i) {
            const std::size_t right = std::min(n, prev + i);
            if (keys[right - 1] == key) {
                ex.labels[right - 1] = true;
                if (!ex.match_sources[right - 1]) ex.match_sources[right - 1] = ci;
                prev = right;
                break;
            }
            const std::size_t left = prev > i ? prev - i : 1;
            if (keys[left - 1] == key) {
                ex.labels[left - 1] = true;
                if (!ex.match_sources[left - 1]) ex.match_sources[left - 1] = ci;
                break;
            }
        }
    }
    return ex;
}

/// Convenience overload splitting both texts first.
inline AnnotatedExample annotate(std::string_view original_text, std::string_view compressed_text,
                                 const AnnotationParams& params = {}, std::string doc_id = {}) {
    return annotate(split_words(original_text), split_words(compressed_text), params,
                    std::move(doc_id));
}

}  // namespace promptpress
