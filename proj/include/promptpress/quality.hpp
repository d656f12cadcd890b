#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "promptpress/annotator.hpp"
#include "promptpress/corpus.hpp"
#include "promptpress/errors.hpp"

namespace promptpress {

/// Quality metrics for one distilled pair and its annotation.
/// vr: fraction of compressed words absent from the original (hallucination
/// proxy). mr: fraction of original words labeled keep. hr: compressed words
/// found in the original, normalized by ORIGINAL length — hr may exceed 1 by
/// definition. ag = hr - mr; 0 for a perfect annotation.
struct QualityReport {
    std::string doc_id;
    double vr = 0.0;
    double mr = 0.0;
    double hr = 0.0;
    double ag = 0.0;
};

namespace detail {

inline std::unordered_set<std::string> key_set(const WordSequence& words, FuzzyMode mode) {
    std::unordered_set<std::string> keys;
    keys.reserve(words.size());
    for (const auto& w : words.words) keys.insert(match_key(w, mode));
    return keys;
}

inline std::size_t hits_in_original(const WordSequence& original, const WordSequence& compressed,
                                    FuzzyMode mode) {
    const auto orig_keys = key_set(original, mode);
    std::size_t hits = 0;
    for (const auto& w : compressed.words) {
        if (orig_keys.count(match_key(w, mode)) > 0) ++hits;
    }
    return hits;
}

}  // namespace detail

inline double variation_rate(const WordSequence& original, const WordSequence& compressed,
                             FuzzyMode mode = FuzzyMode::Normalized) {
    if (compressed.empty()) {
        throw SchemaError("variation_rate: compressed text has no words");
    }
    const std::size_t hits = detail::hits_in_original(original, compressed, mode);
    return static_cast<double>(compressed.size() - hits) / static_cast<double>(compressed.size());
}

inline double variation_rate(const DistilledPair& pair, FuzzyMode mode = FuzzyMode::Normalized) {
    try {
        return variation_rate(split_words(pair.original), split_words(pair.compressed), mode);
    } catch (const SchemaError& e) {
        throw SchemaError(std::string(e.what()) + " (doc_id " + pair.doc_id + ")");
    }
}

inline double matching_rate(const AnnotatedExample& example) {
    if (example.original_words.empty()) {
        throw SchemaError("matching_rate: original text has no words (doc_id " + example.doc_id +
                          ")");
    }
    return static_cast<double>(example.true_count()) /
           static_cast<double>(example.original_words.size());
}

inline double hitting_rate(const WordSequence& original, const WordSequence& compressed,
                           FuzzyMode mode = FuzzyMode::Normalized) {
    if (original.empty()) {
        throw SchemaError("hitting_rate: original text has no words");
    }
    const std::size_t hits = detail::hits_in_original(original, compressed, mode);
    return static_cast<double>(hits) / static_cast<double>(original.size());
}

inline double hitting_rate(const DistilledPair& pair, FuzzyMode mode = FuzzyMode::Normalized) {
    try {
        return hitting_rate(split_words(pair.original), split_words(pair.compressed), mode);
    } catch (const SchemaError& e) {
        throw SchemaError(std::string(e.what()) + " (doc_id " + pair.doc_id + ")");
    }
}

inline double alignment_gap(const DistilledPair& pair, const AnnotatedExample& example,
                            FuzzyMode mode = FuzzyMode::Normalized) {
    return hitting_rate(pair, mode) - matching_rate(example);
}

/// All four metrics in one pass.
inline QualityReport evaluate_quality(const DistilledPair& pair, const AnnotatedExample& example,
                                      FuzzyMode mode = FuzzyMode::Normalized) {
    QualityReport r;
    r.doc_id = pair.doc_id;
    r.vr = variation_rate(pair, mode);
    r.mr = matching_rate(example);
    r.hr = hitting_rate(pair, mode);
    r.ag = r.hr - r.mr;
    return r;
}

struct FilterOptions {
    double vr_drop = 0.05;  ///< fraction of highest-VR examples to discard
    double ag_drop = 0.10;  ///< fraction of highest-AG examples to discard, after the VR pass

    void validate() const {
        if (vr_drop < 0.0 || vr_drop > 1.0 || ag_drop < 0.0 || ag_drop > 1.0) {
            throw ConfigError("filter_dataset: drop fractions must lie in [0,1]");
        }
    }
};

namespace detail {

// ceil(frac * n) with a guard against float noise around exact integers.
inline std::size_t drop_count(double frac, std::size_t n) {
    if (n == 0) return 0;
    double k = std::ceil(frac * static_cast<double>(n) - 1e-9);
    if (k < 0.0) return 0;
    return std::min(n, static_cast<std::size_t>(k));
}

}  // namespace detail

/// Two-stage percentile filter: drop the ceil(vr_drop*n) highest-VR
/// examples, then from the remainder the ceil(ag_drop*m) highest-AG ones.
/// Ties break by doc_id, larger ids dropped first. Returns kept doc_ids in
/// input order.
inline std::vector<std::string> filter_dataset(const std::vector<QualityReport>& reports,
                                               const FilterOptions& options = {}) {
    options.validate();
    if (reports.empty()) throw SchemaError("filter_dataset: no reports to filter");

    std::vector<std::size_t> alive(reports.size());
    std::iota(alive.begin(), alive.end(), std::size_t{0});

    auto drop_top = [&](auto metric, std::size_t count) {
        std::sort(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) {
            double ma = metric(reports[a]);
            double mb = metric(reports[b]);
            if (ma != mb) return ma > mb;
            return reports[a].doc_id > reports[b].doc_id;
        });
        alive.erase(alive.begin(), alive.begin() + static_cast<std::ptrdiff_t>(count));
    };

    drop_top([](const QualityReport& r) { return r.vr; },
             detail::drop_count(options.vr_drop, alive.size()));
    drop_top([](const QualityReport& r) { return r.ag; },
             detail::drop_count(options.ag_drop, alive.size()));

    std::sort(alive.begin(), alive.end());
    std::vector<std::string> kept;
    kept.reserve(alive.size());
    for (std::size_t i : alive) kept.push_back(reports[i].doc_id);
    return kept;
}

}  // namespace promptpress
