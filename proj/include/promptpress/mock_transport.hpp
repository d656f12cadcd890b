#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>

#include "promptpress/annotator.hpp"
#include "promptpress/corpus.hpp"
#include "promptpress/distill.hpp"
#include "promptpress/stopwords.hpp"

namespace promptpress {

// Deterministic in-process transports. They stand in for the remote model
// during tests and offline pipeline runs: a rule maps the chunk text to
// its "compressed" form directly.

/// Applies a chunk → text rule to each request. The chunk is recovered
/// from the rendered prompt, so this also exercises request formatting.
class RuleTransport : public Transport {
  public:
    using Rule = std::function<std::string(std::string_view)>;

    explicit RuleTransport(Rule rule) : rule_(std::move(rule)) {}

    TransportReply send(const CompressionRequest& request) override {
        auto chunk = extract_chunk_text(request.user_text);
        if (!chunk) return {false, "", "request does not carry the expected instruction"};
        return {true, rule_(*chunk), ""};
    }

  private:
    Rule rule_;
};

/// Echoes every chunk unchanged.
inline std::string identity_rule(std::string_view chunk) {
    return std::string(chunk);
}

/// Drops stopwords and words whose punctuation-stripped form is shorter
/// than 3 characters; keeps everything else verbatim.
inline std::string drop_stopwords_rule(std::string_view chunk) {
    WordSequence words = split_words(chunk);
    std::string out;
    for (const auto& w : words.words) {
        const std::string key = exact_key(w);
        if (key.size() < 3 || stopwords().contains(key)) continue;
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

/// Keeps words at even positions (the 1st, 3rd, 5th, ...), so a chunk of
/// n words compresses to ceil(n/2).
inline std::string keep_alternate_rule(std::string_view chunk) {
    WordSequence words = split_words(chunk);
    std::string out;
    for (std::size_t i = 0; i < words.size(); i += 2) {
        if (!out.empty()) out += ' ';
        out += words.words[i];
    }
    return out;
}

inline RuleTransport::Rule mock_rule_by_name(std::string_view name) {
    if (name == "identity") return identity_rule;
    if (name == "drop-stopwords") return drop_stopwords_rule;
    if (name == "alternate") return keep_alternate_rule;
    throw ConfigError("unknown mock rule: " + std::string(name) +
                      " (expected identity, drop-stopwords or alternate)");
}

}  // namespace promptpress
