#include "fres/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fres/size.hpp"

namespace fres {

using nlohmann::ordered_json;

long estimate_input_tokens(const PromptBundle& bundle, long image_token_surcharge) {
    return count_tokens(bundle.user_text) +
           (bundle.image_payload ? image_token_surcharge : 0);
}

// ---------------------------------------------------------------------------
// MockGateway
// ---------------------------------------------------------------------------

MockGateway::MockGateway(std::map<std::string, std::string> replies,
                         std::optional<std::string> default_reply,
                         long image_token_surcharge)
    : replies_(std::move(replies)),
      default_reply_(std::move(default_reply)),
      image_token_surcharge_(image_token_surcharge) {}

MockGateway MockGateway::from_script_file(const std::string& path,
                                          long image_token_surcharge) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open mock script: " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput("mock script " + path + ": " + e.what());
    }
    std::map<std::string, std::string> replies;
    if (doc.contains("replies"))
        replies = doc.at("replies").get<std::map<std::string, std::string>>();
    std::optional<std::string> default_reply;
    if (doc.contains("default") && !doc.at("default").is_null())
        default_reply = doc.at("default").get<std::string>();
    return MockGateway(std::move(replies), std::move(default_reply),
                       image_token_surcharge);
}

ModelReply MockGateway::complete(const PromptBundle& bundle, std::string_view request_key) {
    std::string key(request_key);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        log_.push_back(key);
    }
    ModelReply reply;
    reply.backend = GatewayBackend::Mock;
    reply.input_token_estimate = estimate_input_tokens(bundle, image_token_surcharge_);
    reply.latency = std::chrono::milliseconds(0);
    auto it = replies_.find(key);
    if (it != replies_.end()) {
        reply.text = it->second;
    } else if (default_reply_) {
        reply.text = *default_reply_;
    } else {
        throw GatewayError("mock script has no reply for key: " + key);
    }
    return reply;
}

void MockGateway::set_reply(const std::string& key, const std::string& text) {
    std::lock_guard<std::mutex> lock(mutex_);
    replies_[key] = text;
}

int MockGateway::call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<int>(log_.size());
}

std::vector<std::string> MockGateway::requested_keys() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return log_;
}

// ---------------------------------------------------------------------------
// Base64
// ---------------------------------------------------------------------------

namespace {

std::string base64_encode(std::string_view bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
        i += 3;
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (rest == 2) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string image_data_url(const ImagePayload& payload) {
    if (payload.is_url) return payload.data;
    return "data:" + payload.media_type + ";base64," + base64_encode(payload.data);
}

}  // namespace

// ---------------------------------------------------------------------------
// HttpGateway
// ---------------------------------------------------------------------------

struct HttpGateway::Impl {
    EndpointConfig config;
    std::counting_semaphore<> slots;

    explicit Impl(EndpointConfig cfg)
        : config(std::move(cfg)), slots(std::max(1, config.concurrency_limit)) {}

    std::string api_key() const {
        if (config.api_key_env.empty()) return {};
        const char* value = std::getenv(config.api_key_env.c_str());
        if (value == nullptr || *value == '\0')
            throw AuthError("API key environment variable is not set: " +
                            config.api_key_env);
        return value;
    }

    static ordered_json build_request(const PromptBundle& bundle, const std::string& model) {
        ordered_json body;
        body["model"] = model;
        ordered_json messages = ordered_json::array();
        if (bundle.system_text && !bundle.system_text->empty()) {
            ordered_json msg;
            msg["role"] = "system";
            msg["content"] = *bundle.system_text;
            messages.push_back(std::move(msg));
        }
        ordered_json user;
        user["role"] = "user";
        if (bundle.image_payload) {
            ordered_json parts = ordered_json::array();
            ordered_json text_part;
            text_part["type"] = "text";
            text_part["text"] = bundle.user_text;
            parts.push_back(std::move(text_part));
            ordered_json image_part;
            image_part["type"] = "image_url";
            image_part["image_url"]["url"] = image_data_url(*bundle.image_payload);
            parts.push_back(std::move(image_part));
            user["content"] = std::move(parts);
        } else {
            user["content"] = bundle.user_text;
        }
        messages.push_back(std::move(user));
        body["messages"] = std::move(messages);
        return body;
    }

    static std::string extract_reply(const std::string& body) {
        ordered_json doc;
        try {
            doc = ordered_json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(std::string("malformed completion response: ") + e.what());
        }
        try {
            const auto& message = doc.at("choices").at(0).at("message");
            const auto& content = message.at("content");
            if (content.is_string()) return content.get<std::string>();
            if (content.is_array()) {  // some servers echo multimodal content parts
                std::string text;
                for (const auto& part : content)
                    if (part.is_object() && part.value("type", "") == "text")
                        text += part.value("text", "");
                return text;
            }
        } catch (const nlohmann::json::exception&) {
            // fall through
        }
        throw GatewayError("completion response lacks choices[0].message.content");
    }
};

HttpGateway::HttpGateway(EndpointConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {
    if (impl_->config.base_url.empty())
        throw ConfigError("HTTP gateway requires endpoint.base_url");
}

HttpGateway::~HttpGateway() = default;

ModelReply HttpGateway::complete(const PromptBundle& bundle, std::string_view) {
    const EndpointConfig& cfg = impl_->config;
    impl_->slots.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{impl_->slots};

    const std::string body = Impl::build_request(bundle, cfg.model).dump();
    const std::string key = impl_->api_key();

    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, cfg.max_attempts); ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(cfg.retry_backoff_ms * (1L << (attempt - 1))));
        }
        httplib::Client client(cfg.base_url);
        client.set_connection_timeout(std::chrono::milliseconds(cfg.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(cfg.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(cfg.timeout_ms));
        httplib::Headers headers;
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

        auto result = client.Post(cfg.path, headers, body, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 401 || result->status == 403)
            throw AuthError("endpoint rejected credentials (HTTP " +
                            std::to_string(result->status) + ")");
        if (result->status == 429 || result->status >= 500) {
            last_error = "HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200)
            throw GatewayError("HTTP " + std::to_string(result->status) + ": " +
                               result->body);

        ModelReply reply;
        reply.text = Impl::extract_reply(result->body);
        reply.backend = GatewayBackend::Http;
        reply.input_token_estimate =
            estimate_input_tokens(bundle, cfg.image_token_surcharge);
        reply.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        return reply;
    }
    throw GatewayError("exhausted " + std::to_string(std::max(1, cfg.max_attempts)) +
                       " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.answer_text =
        "You are given a table and a question. Answer the question using only "
        "the table contents. Reply with the answer only, no explanation.\n\n"
        "Table:\n{table}\n\nQuestion: {question}\nAnswer:";
    t.answer_image =
        "You are given an image of a table and a question. Answer the question "
        "using only the table shown in the image. Reply with the answer only, "
        "no explanation.\n\nQuestion: {question}\nAnswer:";
    t.answer_both =
        "You are given a table twice, as an image and as text. Answer the "
        "question using the table contents from either form. Reply with the "
        "answer only, no explanation.\n\nTable:\n{table}\n\nQuestion: "
        "{question}\nAnswer:";
    t.classify =
        "Decide whether the question can be answered by reading a single value "
        "off the table, or whether it needs computation or inference over the "
        "table contents. Reply with exactly one word: retrieval or reasoning."
        "\n\nTable:\n{table}\n\nQuestion: {question}\nLabel:";
    t.decompose =
        "Rewrite the statement as one question plus its answer. The answer "
        "must be a short span copied verbatim from the statement. Reply on two "
        "lines:\nQuestion: <the question>\nAnswer: <the answer>\n\n"
        "Statement: {statement}";
    return t;
}

std::string expand_template(std::string_view template_text,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(template_text.size());
    std::size_t i = 0;
    while (i < template_text.size()) {
        char c = template_text[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t close = template_text.find('}', i + 1);
        if (close == std::string_view::npos)
            throw TemplateError("unterminated placeholder in template");
        std::string name(template_text.substr(i + 1, close - i - 1));
        auto it = values.find(name);
        if (it == values.end())
            throw TemplateError("unbound template placeholder: {" + name + "}");
        out += it->second;
        i = close + 1;
    }
    return out;
}

namespace {

int placeholder_count(std::string_view template_text, std::string_view name) {
    const std::string needle = "{" + std::string(name) + "}";
    int count = 0;
    std::size_t pos = 0;
    while ((pos = template_text.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

ImagePayload resolve_image(const QAInstance& instance, ImageMode mode) {
    if (!instance.image_ref)
        throw MissingImage("instance " + instance.id +
                           " routes an image but has no image_ref");
    const std::string& ref = *instance.image_ref;
    ImagePayload payload;
    if (ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0) {
        payload.is_url = true;
        payload.data = ref;
        return payload;
    }
    std::ifstream in(ref, std::ios::binary);
    if (!in)
        throw MissingImage("instance " + instance.id + ": cannot read image file " + ref);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    payload.data = buffer.str();
    if (payload.data.empty())
        throw MissingImage("instance " + instance.id + ": image file is empty: " + ref);
    payload.is_url = (mode == ImageMode::Url);
    if (payload.is_url) {
        payload.data = ref;  // pass the path through; the server resolves it
    } else {
        auto dot = ref.find_last_of('.');
        std::string ext = dot == std::string::npos ? "" : ref.substr(dot + 1);
        for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (ext == "jpg" || ext == "jpeg") payload.media_type = "image/jpeg";
        else if (ext == "gif") payload.media_type = "image/gif";
        else if (ext == "webp") payload.media_type = "image/webp";
        else payload.media_type = "image/png";
    }
    return payload;
}

}  // namespace

PromptBundle build_prompt(const QAInstance& instance, const RoutingDecision& decision,
                          const PromptBuildOptions& options) {
    const bool wants_text = decision.representations.text;
    const bool wants_image = decision.representations.image;
    if (!wants_text && !wants_image)
        throw TemplateError("routing decision selects no representation");

    std::string template_text;
    std::string template_id;
    if (wants_text && wants_image) {
        template_text = options.templates.answer_both;
        template_id = "answer_both";
    } else if (wants_text) {
        template_text = options.templates.answer_text;
        template_id = "answer_text";
    } else {
        template_text = options.templates.answer_image;
        template_id = "answer_image";
    }

    if (placeholder_count(template_text, "question") != 1)
        throw TemplateError(template_id + " template must use {question} exactly once");
    if (wants_text && placeholder_count(template_text, "table") != 1)
        throw TemplateError(template_id + " template must use {table} exactly once");
    if (!wants_text && placeholder_count(template_text, "table") != 0)
        throw TemplateError(template_id + " template must not reference {table}");

    std::map<std::string, std::string> values;
    values["question"] = instance.question;
    if (wants_text)
        values["table"] = serialize_table(instance.table, options.layout,
                                          options.serialize_options);
    values["caption"] = instance.table.caption().value_or("");

    PromptBundle bundle;
    bundle.template_id = template_id;
    bundle.system_text = options.system_text;
    bundle.user_text = expand_template(template_text, values);
    if (bundle.user_text.empty())
        throw TemplateError(template_id + " template expanded to empty text");
    if (wants_image) bundle.image_payload = resolve_image(instance, options.image_mode);
    return bundle;
}

}  // namespace fres
