#pragma once

#include <chrono>
#include <string>

#include <httplib.h>

#include "promptpress/distill.hpp"
#include "promptpress/errors.hpp"

namespace promptpress {

/// Chat-completions client over HTTP. Each send() uses a fresh connection,
/// which keeps the transport safe for concurrent chunk requests.
class HttpTransport : public Transport {
  public:
    /// base_url like "http://host:port"; the API key may be empty for
    /// unauthenticated endpoints (it is sent as a bearer token otherwise).
    HttpTransport(std::string base_url, std::string model, std::string api_key,
                  std::chrono::milliseconds timeout = std::chrono::milliseconds{30000},
                  std::string path = "/v1/chat/completions")
        : base_url_(std::move(base_url)),
          model_(std::move(model)),
          api_key_(std::move(api_key)),
          timeout_(timeout),
          path_(std::move(path)) {
        if (base_url_.empty()) throw ConfigError("transport: endpoint URL is empty");
    }

    TransportReply send(const CompressionRequest& request) override {
        httplib::Client client(base_url_);
        const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
        client.set_connection_timeout(seconds.count() > 0 ? seconds.count() : 1, 0);
        client.set_read_timeout(seconds.count() > 0 ? seconds.count() : 1, 0);

        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        const std::string body = chat_request_body(request, model_).dump();
        auto result = client.Post(path_, headers, body, "application/json");

        TransportReply reply;
        if (!result) {
            reply.error = "connection error: " + httplib::to_string(result.error());
            return reply;
        }
        if (result->status != 200) {
            reply.error = "HTTP " + std::to_string(result->status) + ": " +
                          result->body.substr(0, 200);
            return reply;
        }
        try {
            reply.text = parse_chat_response(result->body);
        } catch (const TransportError& e) {
            reply.error = e.what();
            return reply;
        }
        reply.ok = true;
        return reply;
    }

  private:
    std::string base_url_;
    std::string model_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
    std::string path_;
};

}  // namespace promptpress
