#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "promptpress/chunker.hpp"
#include "promptpress/corpus.hpp"
#include "promptpress/errors.hpp"
#include "promptpress/records.hpp"

namespace promptpress {

// Chunk-wise distillation: ask an instruction-following chat model to
// compress each chunk by deleting words, then stitch the chunk outputs
// back into one compressed document. The transport is injectable so the
// whole stage runs against scripted fakes in tests.

inline constexpr std::string_view kSystemInstruction =
    "You are an excellent linguist and very good at compressing passages into short "
    "expressions by removing unimportant words, while retaining as much information as "
    "possible.";

inline constexpr std::string_view kUserInstructionPrefix =
    "Compress the given text to short expressions, and such that you (GPT-4) can "
    "reconstruct it as close as possible to the original. Unlike the usual text "
    "compression, I need you to comply with the 5 conditions below:\n"
    "1. You can ONLY remove unimportant words.\n"
    "2. Do not reorder the original words.\n"
    "3. Do not change the original words.\n"
    "4. Do not use abbreviations or emojis.\n"
    "5. Do not add new words or symbols.\n"
    "Compress the origin aggressively by removing words only. Compress the origin as "
    "short as you can, while retaining as much information as possible. If you "
    "understand, please compress the following text:\n";

inline constexpr std::string_view kUserInstructionSuffix = "\nThe compressed text is:";

inline constexpr double kDistillTemperature = 0.3;
inline constexpr double kDistillTopP = 1.0;
inline constexpr std::size_t kDistillMaxGenerationTokens = 4096;
inline constexpr std::size_t kDocumentTokenLimit = 28000;

struct CompressionRequest {
    std::string system_text;
    std::string user_text;
    double temperature = kDistillTemperature;
    double top_p = kDistillTopP;
    std::size_t max_generation_tokens = kDistillMaxGenerationTokens;

    bool operator==(const CompressionRequest&) const = default;
};

inline CompressionRequest build_compression_request(std::string_view chunk_text) {
    if (chunk_text.empty()) {
        throw SchemaError("cannot build a compression request for an empty chunk");
    }
    CompressionRequest request;
    request.system_text = kSystemInstruction;
    request.user_text.reserve(kUserInstructionPrefix.size() + chunk_text.size() +
                              kUserInstructionSuffix.size());
    request.user_text.append(kUserInstructionPrefix);
    request.user_text.append(chunk_text);
    request.user_text.append(kUserInstructionSuffix);
    return request;
}

/// Inverse of build_compression_request, for mock transports that need the
/// chunk back out of the prompt.
inline std::optional<std::string> extract_chunk_text(std::string_view user_text) {
    if (!user_text.starts_with(kUserInstructionPrefix) ||
        !user_text.ends_with(kUserInstructionSuffix)) {
        return std::nullopt;
    }
    const std::size_t begin = kUserInstructionPrefix.size();
    const std::size_t len = user_text.size() - begin - kUserInstructionSuffix.size();
    return std::string(user_text.substr(begin, len));
}

struct TransportPolicy {
    std::size_t max_retries = 2;
    std::chrono::milliseconds initial_backoff{100};
    double backoff_multiplier = 2.0;
    std::chrono::milliseconds timeout{30000};

    void validate() const {
        if (timeout.count() <= 0) throw ConfigError("transport: timeout must be positive");
        if (initial_backoff.count() < 0) {
            throw ConfigError("transport: backoff delay must be non-negative");
        }
        if (backoff_multiplier < 1.0) {
            throw ConfigError("transport: backoff multiplier must be >= 1");
        }
    }
};

struct TransportReply {
    bool ok = false;
    std::string text;   ///< model output when ok
    std::string error;  ///< diagnostic when not ok
};

/// Narrow send/receive contract. Implementations must tolerate concurrent
/// send() calls from multiple threads.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual TransportReply send(const CompressionRequest& request) = 0;
};

// ── Wire format (chat-completions style) ───────────────────────────────────

inline nlohmann::json chat_request_body(const CompressionRequest& request,
                                        const std::string& model) {
    nlohmann::json body;
    body["model"] = model;
    body["messages"] = nlohmann::json::array({
        nlohmann::json{{"role", "system"}, {"content", request.system_text}},
        nlohmann::json{{"role", "user"}, {"content", request.user_text}},
    });
    body["temperature"] = request.temperature;
    body["top_p"] = request.top_p;
    body["max_tokens"] = request.max_generation_tokens;
    return body;
}

inline std::string parse_chat_response(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw TransportError(std::string("response is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
        j["choices"].empty()) {
        throw TransportError("response has no choices");
    }
    const auto& first = j["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        throw TransportError("response choice has no message content");
    }
    return first["message"]["content"].get<std::string>();
}

// ── Document distillation ──────────────────────────────────────────────────

struct DistillOptions {
    std::size_t max_chunk_tokens = 512;
    std::size_t document_token_limit = kDocumentTokenLimit;
    std::size_t parallelism = 1;
    TokenCounter counter{};  ///< empty → whitespace word counter
};

struct ChunkAttemptLog {
    std::size_t chunk_index = 0;
    std::size_t attempts = 0;
    bool ok = false;
    std::string last_error;
};

struct DistillTrace {
    std::vector<ChunkAttemptLog> chunks;
};

namespace detail {

struct ChunkOutcome {
    bool ok = false;
    std::string text;
    std::string error;
    std::size_t attempts = 0;
};

/// One chunk: send, retry on failure with exponential backoff. At most
/// 1 + max_retries transport calls.
inline ChunkOutcome distill_chunk(Transport& transport, const CompressionRequest& request,
                                  const TransportPolicy& policy) {
    ChunkOutcome outcome;
    std::chrono::duration<double, std::milli> delay = policy.initial_backoff;
    for (std::size_t attempt = 0; attempt <= policy.max_retries; ++attempt) {
        if (attempt > 0) {
            if (delay.count() > 0) {
                std::this_thread::sleep_for(
                    std::chrono::duration_cast<std::chrono::milliseconds>(delay));
            }
            delay *= policy.backoff_multiplier;
        }
        ++outcome.attempts;
        TransportReply reply;
        try {
            reply = transport.send(request);
        } catch (const TransportError& e) {
            reply.ok = false;
            reply.error = e.what();
        }
        if (reply.ok) {
            outcome.ok = true;
            outcome.text = std::move(reply.text);
            return outcome;
        }
        outcome.error = reply.error.empty() ? "transport failure" : reply.error;
    }
    return outcome;
}

}  // namespace detail

/// Distill one document: truncate to the document token limit, chunk,
/// compress every chunk (possibly concurrently), join the chunk outputs
/// with single spaces. The pair stores the truncated text as its original
/// side, since that is what the labels will align against. Fails as a
/// whole if any chunk exhausts its retries.
inline DistilledPair distill_document(const DocRecord& doc, Transport& transport,
                                      const TransportPolicy& policy = {},
                                      const DistillOptions& options = {},
                                      DistillTrace* trace = nullptr) {
    policy.validate();
    const std::string truncated{
        truncate_to_tokens(doc.text, options.document_token_limit, options.counter)};
    std::vector<Chunk> chunks = chunk(truncated, options.max_chunk_tokens, options.counter, doc.doc_id);

    std::vector<detail::ChunkOutcome> outcomes(chunks.size());
    const std::size_t workers =
        std::max<std::size_t>(1, std::min(options.parallelism, chunks.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            outcomes[i] =
                detail::distill_chunk(transport, build_compression_request(chunks[i].text), policy);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            try {
                for (std::size_t i = next.fetch_add(1); i < chunks.size(); i = next.fetch_add(1)) {
                    outcomes[i] = detail::distill_chunk(
                        transport, build_compression_request(chunks[i].text), policy);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    if (trace) {
        trace->chunks.clear();
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            trace->chunks.push_back(
                {i, outcomes[i].attempts, outcomes[i].ok, outcomes[i].error});
        }
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].ok) {
            throw TransportError("doc_id " + doc.doc_id + " chunk " + std::to_string(i) +
                                 " failed after " + std::to_string(outcomes[i].attempts) +
                                 " attempts: " + outcomes[i].error);
        }
    }

    DistilledPair pair;
    pair.doc_id = doc.doc_id;
    pair.original = truncated;
    // Chunk texts concatenate back to the truncated original, so the seams
    // are byte offsets: first 0, last original.size().
    pair.chunk_boundaries.reserve(chunks.size() + 1);
    pair.chunk_boundaries.push_back(0);
    std::size_t offset = 0;
    for (const auto& c : chunks) {
        offset += c.text.size();
        pair.chunk_boundaries.push_back(offset);
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].text.empty()) continue;
        if (!pair.compressed.empty()) pair.compressed += ' ';
        pair.compressed += outcomes[i].text;
    }
    return pair;
}

// ── Dataset statistics ─────────────────────────────────────────────────────

struct DatasetStats {
    std::size_t documents = 0;
    std::size_t chunks = 0;
    double avg_sentences_per_document = 0.0;
    double avg_original_tokens = 0.0;
    double avg_compressed_tokens = 0.0;
    double aggregate_inverse_tau = 0.0;  ///< total original tokens / total compressed tokens
};

inline DatasetStats dataset_stats(const std::vector<DistilledPair>& pairs,
                                  const TokenCounter& counter = {}) {
    if (pairs.empty()) throw SchemaError("dataset stats: no pairs");
    DatasetStats stats;
    stats.documents = pairs.size();
    std::size_t sentences = 0, original_tokens = 0, compressed_tokens = 0;
    for (const auto& pair : pairs) {
        stats.chunks += pair.chunk_boundaries.size() > 1 ? pair.chunk_boundaries.size() - 1
                                                         : (pair.original.empty() ? 0 : 1);
        sentences += count_sentences(pair.original);
        original_tokens += count_tokens(pair.original, counter);
        compressed_tokens += count_tokens(pair.compressed, counter);
    }
    const double docs = static_cast<double>(stats.documents);
    stats.avg_sentences_per_document = static_cast<double>(sentences) / docs;
    stats.avg_original_tokens = static_cast<double>(original_tokens) / docs;
    stats.avg_compressed_tokens = static_cast<double>(compressed_tokens) / docs;
    stats.aggregate_inverse_tau =
        compressed_tokens == 0
            ? std::numeric_limits<double>::infinity()
            : static_cast<double>(original_tokens) / static_cast<double>(compressed_tokens);
    return stats;
}

}  // namespace promptpress
