#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "promptpress/corpus.hpp"
#include "promptpress/errors.hpp"
#include "promptpress/scorer.hpp"

namespace promptpress {

// Probability-ranked word retention. Every entry point selects some kept
// index set, then emits the kept words in their original order.

struct CompressionResult {
    std::string doc_id;
    std::vector<std::size_t> kept_indices;  ///< strictly increasing
    std::string compressed_text;            ///< kept words joined with single spaces
    double achieved_ratio = 1.0;            ///< original count / kept count

    std::size_t kept_count() const { return kept_indices.size(); }
};

namespace detail {

inline void require_same_length(const WordSequence& words, const std::vector<double>& probs) {
    if (words.size() != probs.size()) {
        throw SchemaError("compress: " + std::to_string(probs.size()) + " probabilities for " +
                          std::to_string(words.size()) + " words");
    }
}

inline CompressionResult build_result(const WordSequence& words,
                                      std::vector<std::size_t> kept_indices, std::string doc_id) {
    std::sort(kept_indices.begin(), kept_indices.end());
    CompressionResult result;
    result.doc_id = std::move(doc_id);
    result.compressed_text.reserve(words.source_len);
    for (std::size_t i = 0; i < kept_indices.size(); ++i) {
        if (i > 0) result.compressed_text += ' ';
        result.compressed_text += words.words[kept_indices[i]];
    }
    if (words.empty()) {
        result.achieved_ratio = 1.0;  // empty in, empty out: nothing was compressed
    } else if (kept_indices.empty()) {
        result.achieved_ratio = std::numeric_limits<double>::infinity();
    } else {
        result.achieved_ratio =
            static_cast<double>(words.size()) / static_cast<double>(kept_indices.size());
    }
    result.kept_indices = std::move(kept_indices);
    return result;
}

/// Indices of the n highest probabilities; equal probabilities won by the
/// lower index. nth_element keeps this O(N) on large documents.
inline std::vector<std::size_t> top_indices(const std::vector<double>& probs, std::size_t n) {
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto ranks_before = [&probs](std::size_t a, std::size_t b) {
        if (probs[a] != probs[b]) return probs[a] > probs[b];
        return a < b;
    };
    if (n < order.size()) {
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n),
                         order.end(), ranks_before);
        order.resize(n);
    }
    return order;
}

}  // namespace detail

/// Keep the Ñ = max(1, round(tau·N)) highest-probability words, half
/// rounding up. tau=1 keeps everything.
inline CompressionResult compress_fixed(const WordSequence& words, const std::vector<double>& probs,
                                        double tau, std::string doc_id = {}) {
    if (!(tau > 0.0) || tau > 1.0) {
        throw ConfigError("compress: rate must be in (0, 1]");
    }
    detail::require_same_length(words, probs);
    if (words.empty()) return detail::build_result(words, {}, std::move(doc_id));
    const double scaled = tau * static_cast<double>(words.size());
    const std::size_t target = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(scaled + 0.5)));
    return detail::build_result(words, detail::top_indices(probs, std::min(target, words.size())),
                                std::move(doc_id));
}

/// Keep the min(target_n, N) highest-probability words.
inline CompressionResult compress_target_tokens(const WordSequence& words,
                                                const std::vector<double>& probs,
                                                std::size_t target_n, std::string doc_id = {}) {
    if (target_n < 1) throw ConfigError("compress: target token count must be >= 1");
    detail::require_same_length(words, probs);
    if (words.empty()) return detail::build_result(words, {}, std::move(doc_id));
    return detail::build_result(words, detail::top_indices(probs, std::min(target_n, words.size())),
                                std::move(doc_id));
}

/// Corpus-wide probability threshold: the k-th largest probability where
/// k = ceil(target_rate · total words). Keeping p >= θ then retains the k
/// top-probability words across the corpus, plus any words tied with the
/// k-th. target_rate=1 returns the corpus minimum.
inline double dynamic_threshold(const std::vector<ScoredWords>& corpus, double target_rate) {
    if (!(target_rate > 0.0) || target_rate > 1.0) {
        throw ConfigError("compress: target rate must be in (0, 1]");
    }
    std::vector<double> all;
    for (const auto& doc : corpus) all.insert(all.end(), doc.probs.begin(), doc.probs.end());
    if (all.empty()) throw SchemaError("dynamic threshold: corpus has no scored words");

    const double scaled = target_rate * static_cast<double>(all.size());
    std::size_t k = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
    k = std::clamp<std::size_t>(k, 1, all.size());
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k - 1), all.end(),
                     std::greater<>());
    return all[k - 1];
}

/// Keep exactly the words with p >= θ; a document may compress to nothing.
inline CompressionResult compress_with_threshold(const WordSequence& words,
                                                 const std::vector<double>& probs, double threshold,
                                                 std::string doc_id = {}) {
    detail::require_same_length(words, probs);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] >= threshold) kept.push_back(i);
    }
    return detail::build_result(words, std::move(kept), std::move(doc_id));
}

}  // namespace promptpress
