#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fres/corpus.hpp"
#include "fres/router.hpp"

namespace fres {

enum class ImageMode { Base64, Url };

struct EndpointConfig {
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;  // name of the env var holding the key; empty = none
    int timeout_ms = 30000;
    int max_attempts = 3;
    int retry_backoff_ms = 250;  // doubles per retry
    int concurrency_limit = 4;
    ImageMode image_mode = ImageMode::Base64;
    // Flat per-image addition to the input token estimate; image tokenization
    // is model specific, so this stays a config knob.
    long image_token_surcharge = 1024;
};

struct ImagePayload {
    bool is_url = false;
    std::string data;  // URL, or raw image bytes to be base64-embedded
    std::string media_type = "image/png";
};

struct PromptBundle {
    std::optional<std::string> system_text;
    std::string user_text;
    std::optional<ImagePayload> image_payload;
    std::string template_id;
};

enum class GatewayBackend { Http, Mock };

struct ModelReply {
    std::string text;
    long input_token_estimate = 0;
    std::chrono::milliseconds latency{0};
    GatewayBackend backend = GatewayBackend::Mock;
};

// count_tokens(user_text) plus the image surcharge when an image rides along.
long estimate_input_tokens(const PromptBundle& bundle, long image_token_surcharge);

class ModelGateway {
public:
    virtual ~ModelGateway() = default;

    // request_key identifies the call for scripted backends (answering calls
    // use the instance id, classification "classify:<id>", statement
    // decomposition "decompose:<key>"); the HTTP backend ignores it.
    virtual ModelReply complete(const PromptBundle& bundle,
                                std::string_view request_key = {}) = 0;
};

// Deterministic scripted backend; end-to-end tests never touch the network.
// Script file: {"default": "...", "replies": {"<key>": "..."}} with default
// optional (a miss without one raises GatewayError). Safe for concurrent use.
class MockGateway final : public ModelGateway {
public:
    MockGateway() = default;
    explicit MockGateway(std::map<std::string, std::string> replies,
                         std::optional<std::string> default_reply = std::nullopt,
                         long image_token_surcharge = 1024);
    MockGateway(MockGateway&& other) noexcept
        : replies_(std::move(other.replies_)),
          default_reply_(std::move(other.default_reply_)),
          image_token_surcharge_(other.image_token_surcharge_),
          log_(std::move(other.log_)) {}
    static MockGateway from_script_file(const std::string& path,
                                        long image_token_surcharge = 1024);

    ModelReply complete(const PromptBundle& bundle,
                        std::string_view request_key = {}) override;

    void set_reply(const std::string& key, const std::string& text);
    int call_count() const;
    std::vector<std::string> requested_keys() const;

private:
    std::map<std::string, std::string> replies_;
    std::optional<std::string> default_reply_;
    long image_token_surcharge_ = 1024;
    mutable std::mutex mutex_;
    std::vector<std::string> log_;
};

// Chat-completions JSON over HTTP. Retries with exponential backoff on
// transport errors, 429 and 5xx; 401/403 raise AuthError without retrying.
// Concurrent completes are bounded by the configured limit.
class HttpGateway final : public ModelGateway {
public:
    explicit HttpGateway(EndpointConfig config);
    ~HttpGateway() override;

    ModelReply complete(const PromptBundle& bundle,
                        std::string_view request_key = {}) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

struct PromptTemplates {
    std::string answer_text;   // placeholders: {table} {question}
    std::string answer_image;  // placeholders: {question}
    std::string answer_both;   // placeholders: {table} {question}
    std::string classify;      // placeholders: {table} {question}
    std::string decompose;     // placeholders: {statement}

    static PromptTemplates defaults();
};

// Substitutes {name} placeholders. Throws TemplateError on a placeholder
// with no binding.
std::string expand_template(std::string_view template_text,
                            const std::map<std::string, std::string>& values);

struct PromptBuildOptions {
    PromptTemplates templates = PromptTemplates::defaults();
    TableLayout layout = TableLayout::Markdown;
    SerializeOptions serialize_options = {};
    ImageMode image_mode = ImageMode::Base64;
    std::optional<std::string> system_text;
};

// Expands the template matching the decision's representation set. The
// serialized table appears exactly once when text is routed; the image
// payload resolves from instance.image_ref (MissingImage when it cannot).
PromptBundle build_prompt(const QAInstance& instance, const RoutingDecision& decision,
                          const PromptBuildOptions& options = {});

}  // namespace fres
