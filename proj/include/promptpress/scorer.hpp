#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "promptpress/annotator.hpp"
#include "promptpress/corpus.hpp"
#include "promptpress/errors.hpp"
#include "promptpress/stopwords.hpp"

namespace promptpress {

// The token-classification contract: words in, per-word preserve
// probabilities out. The reference model is a linear classifier over
// handcrafted features; probabilities computed elsewhere (e.g. by a
// fine-tuned transformer) enter through load_external_scores instead.

inline constexpr std::size_t kFeatureDim = 9;

enum FeatureIndex : std::size_t {
    kBias = 0,
    kLogLength,
    kDocPosition,
    kIsCapitalized,
    kContainsDigit,
    kIsPunctuationOnly,
    kLogFrequency,
    kIsStopword,
    kSentencePosition,
};

using FeatureVector = std::array<double, kFeatureDim>;

/// Word counts over the training corpus, keyed by the lowercase
/// punctuation-stripped form. Ordered map keeps serialization stable.
struct CorpusFrequencyTable {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;

    void add(const WordSequence& words) {
        for (const auto& w : words.words) {
            ++counts[exact_key(w)];
            ++total;
        }
    }

    std::uint64_t count(std::string_view word) const {
        auto it = counts.find(exact_key(word));
        return it == counts.end() ? 0 : it->second;
    }
};

namespace detail {

inline bool word_ends_sentence(std::string_view word) {
    std::size_t end = word.size();
    while (end > 0) {
        char c = word[end - 1];
        if (c == '"' || c == '\'' || c == ')' || c == ']') {
            --end;
            continue;
        }
        break;
    }
    if (end == 0) return false;
    char c = word[end - 1];
    return c == '.' || c == '!' || c == '?';
}

}  // namespace detail

/// One fixed-dimension feature vector per word. Positions are scaled to
/// [0,1]; singleton documents/sentences get position 0.
inline std::vector<FeatureVector> featurize(const WordSequence& words,
                                            const CorpusFrequencyTable& freq) {
    const std::size_t n = words.size();
    std::vector<FeatureVector> features(n);

    // Sentence extents from terminator-final words.
    std::vector<std::size_t> sent_begin(n), sent_len(n);
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (detail::word_ends_sentence(words.words[i]) || i + 1 == n) {
            for (std::size_t j = start; j <= i; ++j) {
                sent_begin[j] = start;
                sent_len[j] = i - start + 1;
            }
            start = i + 1;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const std::string& w = words.words[i];
        FeatureVector& f = features[i];
        f[kBias] = 1.0;
        f[kLogLength] = std::log(1.0 + static_cast<double>(w.size()));
        f[kDocPosition] = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        f[kIsCapitalized] = !w.empty() && w.front() >= 'A' && w.front() <= 'Z' ? 1.0 : 0.0;
        f[kContainsDigit] =
            std::any_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; }) ? 1.0
                                                                                         : 0.0;
        f[kIsPunctuationOnly] =
            !w.empty() && std::all_of(w.begin(), w.end(), detail::is_ascii_punct) ? 1.0 : 0.0;
        f[kLogFrequency] = std::log(1.0 + static_cast<double>(freq.count(w)));
        f[kIsStopword] = is_stopword(w) ? 1.0 : 0.0;
        f[kSentencePosition] = sent_len[i] > 1 ? static_cast<double>(i - sent_begin[i]) /
                                                     static_cast<double>(sent_len[i] - 1)
                                               : 0.0;
    }
    return features;
}

struct TrainingMeta {
    std::int64_t epochs = 0;
    double learning_rate = 0.0;
    std::int64_t batch_size = 0;
    std::uint64_t seed = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> epoch_losses;  ///< full-dataset loss after each epoch
};

/// softmax(W h + b) over the two classes {preserve, discard}. Row 0 of the
/// weight matrix scores preserve.
struct LinearScorerModel {
    std::array<double, 2 * kFeatureDim> weights{};
    std::array<double, 2> bias{};
    TrainingMeta meta;
};

inline constexpr std::size_t kPreserveClass = 0;
inline constexpr std::size_t kDiscardClass = 1;

/// Class probabilities for one word; max-subtracted softmax.
inline std::array<double, 2> class_probabilities(const LinearScorerModel& model,
                                                 const FeatureVector& h) {
    std::array<double, 2> z{model.bias[0], model.bias[1]};
    for (std::size_t k = 0; k < kFeatureDim; ++k) {
        z[0] += model.weights[k] * h[k];
        z[1] += model.weights[kFeatureDim + k] * h[k];
    }
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m);
    const double e1 = std::exp(z[1] - m);
    const double sum = e0 + e1;
    return {e0 / sum, e1 / sum};
}

inline double preserve_probability(const LinearScorerModel& model, const FeatureVector& h) {
    return class_probabilities(model, h)[kPreserveClass];
}

inline std::vector<double> score(const LinearScorerModel& model,
                                 std::span<const FeatureVector> features) {
    std::vector<double> probs;
    probs.reserve(features.size());
    for (const auto& h : features) probs.push_back(preserve_probability(model, h));
    return probs;
}

/// Per-word preserve probabilities for a document.
struct ScoredWords {
    std::string doc_id;
    std::vector<double> probs;
};

inline ScoredWords score_document(const LinearScorerModel& model, const WordSequence& words,
                                  const CorpusFrequencyTable& freq, std::string doc_id = {}) {
    auto features = featurize(words, freq);
    return ScoredWords{std::move(doc_id), score(model, features)};
}

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean cross-entropy over one example's words, natural log, probabilities
/// clamped to [1e-12, 1-1e-12].
inline double example_loss(const LinearScorerModel& model, std::span<const FeatureVector> features,
                           const std::vector<bool>& labels) {
    if (features.size() != labels.size()) {
        throw SchemaError("loss: feature/label length mismatch");
    }
    if (features.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto p = class_probabilities(model, features[i]);
        const double py = p[labels[i] ? kPreserveClass : kDiscardClass];
        sum += -std::log(std::clamp(py, kProbabilityFloor, 1.0 - kProbabilityFloor));
    }
    return sum / static_cast<double>(features.size());
}

inline double loss(const LinearScorerModel& model, const AnnotatedExample& example,
                   const CorpusFrequencyTable& freq) {
    auto features = featurize(example.original_words, freq);
    return example_loss(model, features, example.labels);
}

struct TrainOptions {
    std::int64_t epochs = 10;
    double learning_rate = 1e-5;  ///< transformer-scale default; the linear CLI uses 0.1
    std::int64_t batch_size = 10;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
        if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
    }
};

namespace detail {

// Fisher-Yates with explicit draws so the visit order is reproducible
// across standard libraries, not just across runs.
inline void shuffle_indices(std::vector<std::size_t>& order, std::uint64_t& state) {
    auto next = [&state]() {
        // splitmix64
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    };
    for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(next() % i);
        std::swap(order[i - 1], order[j]);
    }
}

}  // namespace detail

struct FeaturizedExample {
    std::vector<FeatureVector> features;
    std::vector<bool> labels;
};

inline std::vector<FeaturizedExample> featurize_dataset(
    const std::vector<AnnotatedExample>& dataset, const CorpusFrequencyTable& freq) {
    std::vector<FeaturizedExample> examples;
    examples.reserve(dataset.size());
    for (const auto& ex : dataset) {
        if (ex.labels.size() != ex.original_words.size()) {
            throw SchemaError("train: labels length mismatch (doc_id " + ex.doc_id + ")");
        }
        examples.push_back({featurize(ex.original_words, freq), ex.labels});
    }
    return examples;
}

/// Gradient of the batch objective: the mean over batch examples of each
/// example's mean word cross-entropy.
struct BatchGradient {
    std::array<double, 2 * kFeatureDim> weights{};
    std::array<double, 2> bias{};
    double loss = 0.0;
};

inline BatchGradient batch_gradient(const LinearScorerModel& model,
                                    const std::vector<FeaturizedExample>& examples,
                                    std::span<const std::size_t> batch) {
    BatchGradient grad;
    if (batch.empty()) return grad;
    const double batch_norm = 1.0 / static_cast<double>(batch.size());
    for (std::size_t index : batch) {
        const auto& ex = examples.at(index);
        if (ex.features.empty()) continue;
        const double word_norm = batch_norm / static_cast<double>(ex.features.size());
        for (std::size_t i = 0; i < ex.features.size(); ++i) {
            const auto p = class_probabilities(model, ex.features[i]);
            const std::size_t y = ex.labels[i] ? kPreserveClass : kDiscardClass;
            grad.loss -=
                word_norm * std::log(std::clamp(p[y], kProbabilityFloor, 1.0 - kProbabilityFloor));
            for (std::size_t c = 0; c < 2; ++c) {
                const double g = (p[c] - (c == y ? 1.0 : 0.0)) * word_norm;
                grad.bias[c] += g;
                for (std::size_t k = 0; k < kFeatureDim; ++k) {
                    grad.weights[c * kFeatureDim + k] += g * ex.features[i][k];
                }
            }
        }
    }
    return grad;
}

/// Mini-batch gradient descent on the mean cross-entropy objective with
/// analytic gradients. Parameters start at zero (the objective is convex);
/// identical options and dataset give bit-identical models.
inline LinearScorerModel train(const std::vector<AnnotatedExample>& dataset,
                               const CorpusFrequencyTable& freq, const TrainOptions& options = {}) {
    options.validate();
    if (dataset.empty()) throw SchemaError("train: dataset is empty");

    const std::vector<FeaturizedExample> examples = featurize_dataset(dataset, freq);

    LinearScorerModel model;
    model.meta.epochs = options.epochs;
    model.meta.learning_rate = options.learning_rate;
    model.meta.batch_size = options.batch_size;
    model.meta.seed = options.seed;

    auto dataset_loss = [&] {
        double sum = 0.0;
        for (const auto& ex : examples) sum += example_loss(model, ex.features, ex.labels);
        return sum / static_cast<double>(examples.size());
    };
    model.meta.initial_loss = dataset_loss();

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::uint64_t rng_state = options.seed;
    const std::size_t batch = static_cast<std::size_t>(options.batch_size);

    for (std::int64_t epoch = 0; epoch < options.epochs; ++epoch) {
        detail::shuffle_indices(order, rng_state);
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(order.size(), begin + batch);
            const BatchGradient grad = batch_gradient(
                model, examples, std::span<const std::size_t>(order).subspan(begin, end - begin));
            if (!std::isfinite(grad.loss)) {
                throw std::runtime_error("train: non-finite loss in epoch " +
                                         std::to_string(epoch + 1) + " batch " +
                                         std::to_string(begin / batch + 1));
            }
            for (std::size_t k = 0; k < grad.weights.size(); ++k) {
                model.weights[k] -= options.learning_rate * grad.weights[k];
            }
            for (std::size_t c = 0; c < 2; ++c) {
                model.bias[c] -= options.learning_rate * grad.bias[c];
            }
        }
        model.meta.epoch_losses.push_back(dataset_loss());
    }
    model.meta.final_loss =
        model.meta.epoch_losses.empty() ? model.meta.initial_loss : model.meta.epoch_losses.back();
    return model;
}

/// Word probability from its subword probabilities: plain arithmetic mean.
inline double aggregate_word_probability(std::span<const double> subword_probs) {
    if (subword_probs.empty()) {
        throw ConfigError("aggregate_word_probability: empty subword list");
    }
    const double sum = std::accumulate(subword_probs.begin(), subword_probs.end(), 0.0);
    return sum / static_cast<double>(subword_probs.size());
}

/// Import externally computed probabilities, collapsing subword scores to
/// word scores when the record carries a subword map. The map must
/// partition the probability list, one group per word.
template <typename ScoreRecordT>
ScoredWords load_external_scores(const ScoreRecordT& record, std::size_t expected_word_count) {
    for (double p : record.probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw SchemaError("score record for doc_id " + record.doc_id +
                              " has probability outside [0,1]");
        }
    }
    ScoredWords scored;
    scored.doc_id = record.doc_id;
    if (!record.subword_map) {
        if (record.probs.size() != expected_word_count) {
            throw SchemaError("score record for doc_id " + record.doc_id + " has " +
                              std::to_string(record.probs.size()) + " probabilities but the " +
                              "document has " + std::to_string(expected_word_count) + " words");
        }
        scored.probs = record.probs;
        return scored;
    }

    const auto& map = *record.subword_map;
    if (map.size() != expected_word_count) {
        throw SchemaError("subword map for doc_id " + record.doc_id + " covers " +
                          std::to_string(map.size()) + " words but the document has " +
                          std::to_string(expected_word_count));
    }
    std::vector<bool> used(record.probs.size(), false);
    std::size_t covered = 0;
    scored.probs.reserve(map.size());
    for (const auto& group : map) {
        if (group.empty()) {
            throw SchemaError("subword map for doc_id " + record.doc_id + " has an empty group");
        }
        std::vector<double> ps;
        ps.reserve(group.size());
        for (std::size_t idx : group) {
            if (idx >= record.probs.size() || used[idx]) {
                throw SchemaError("subword map for doc_id " + record.doc_id +
                                  " is not a partition of the probability list");
            }
            used[idx] = true;
            ++covered;
            ps.push_back(record.probs[idx]);
        }
        scored.probs.push_back(aggregate_word_probability(ps));
    }
    if (covered != record.probs.size()) {
        throw SchemaError("subword map for doc_id " + record.doc_id + " leaves " +
                          std::to_string(record.probs.size() - covered) +
                          " probabilities unassigned");
    }
    return scored;
}

// ── Model file: {"dim":9,"W":[18],"b":[2],"meta":{...}} ────────────────────

inline nlohmann::json model_to_json(const LinearScorerModel& model,
                                    const CorpusFrequencyTable& freq) {
    nlohmann::json meta;
    meta["epochs"] = model.meta.epochs;
    meta["learning_rate"] = model.meta.learning_rate;
    meta["batch_size"] = model.meta.batch_size;
    meta["seed"] = model.meta.seed;
    meta["initial_loss"] = model.meta.initial_loss;
    meta["final_loss"] = model.meta.final_loss;
    meta["epoch_losses"] = model.meta.epoch_losses;
    meta["frequency_table"] = freq.counts;
    meta["frequency_total"] = freq.total;

    nlohmann::json j;
    j["dim"] = kFeatureDim;
    j["W"] = model.weights;
    j["b"] = model.bias;
    j["meta"] = std::move(meta);
    return j;
}

inline std::pair<LinearScorerModel, CorpusFrequencyTable> model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("W") || !j.contains("b")) {
        throw SchemaError("model file must contain dim, W and b");
    }
    if (j["dim"].get<std::size_t>() != kFeatureDim) {
        throw SchemaError("model dimension " + j["dim"].dump() + " does not match expected " +
                          std::to_string(kFeatureDim));
    }
    LinearScorerModel model;
    const auto& w = j["W"];
    const auto& b = j["b"];
    if (!w.is_array() || w.size() != model.weights.size() || !b.is_array() ||
        b.size() != model.bias.size()) {
        throw SchemaError("model W must hold " + std::to_string(model.weights.size()) +
                          " values and b " + std::to_string(model.bias.size()));
    }
    for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights[i] = w[i].get<double>();
    for (std::size_t i = 0; i < model.bias.size(); ++i) model.bias[i] = b[i].get<double>();

    CorpusFrequencyTable freq;
    if (j.contains("meta") && j["meta"].is_object()) {
        const auto& meta = j["meta"];
        auto get_or = [&](const char* key, auto fallback) {
            using T = decltype(fallback);
            return meta.contains(key) ? meta[key].get<T>() : fallback;
        };
        model.meta.epochs = get_or("epochs", std::int64_t{0});
        model.meta.learning_rate = get_or("learning_rate", 0.0);
        model.meta.batch_size = get_or("batch_size", std::int64_t{0});
        model.meta.seed = get_or("seed", std::uint64_t{0});
        model.meta.initial_loss = get_or("initial_loss", 0.0);
        model.meta.final_loss = get_or("final_loss", 0.0);
        if (meta.contains("epoch_losses")) {
            model.meta.epoch_losses = meta["epoch_losses"].get<std::vector<double>>();
        }
        if (meta.contains("frequency_table")) {
            freq.counts = meta["frequency_table"].get<std::map<std::string, std::uint64_t>>();
        }
        freq.total = get_or("frequency_total", std::uint64_t{0});
    }
    return {std::move(model), std::move(freq)};
}

inline void save_model(const LinearScorerModel& model, const CorpusFrequencyTable& freq,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot open output file: " + path.string());
    out << model_to_json(model, freq).dump(2) << '\n';
    if (!out) throw FileError("failed while writing: " + path.string());
}

inline std::pair<LinearScorerModel, CorpusFrequencyTable> load_model(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path.string() + ": invalid model file: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace promptpress
