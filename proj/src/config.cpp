#include "fres/config.hpp"

#include <fstream>

namespace fres {

using nlohmann::ordered_json;

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::Fres: return "fres";
        case Strategy::TextOnly: return "text";
        case Strategy::ImageOnly: return "image";
        case Strategy::Both: return "both";
    }
    return "fres";
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "fres") return Strategy::Fres;
    if (s == "text") return Strategy::TextOnly;
    if (s == "image") return Strategy::ImageOnly;
    if (s == "both") return Strategy::Both;
    throw ConfigError("unknown strategy: " + std::string(s) +
                      " (expected fres|text|image|both)");
}

namespace {

EndpointConfig endpoint_from_json(const ordered_json& j) {
    EndpointConfig e;
    e.base_url = j.value("base_url", e.base_url);
    e.path = j.value("path", e.path);
    e.model = j.value("model", e.model);
    e.api_key_env = j.value("api_key_env", e.api_key_env);
    e.timeout_ms = j.value("timeout_ms", e.timeout_ms);
    e.max_attempts = j.value("max_attempts", e.max_attempts);
    e.retry_backoff_ms = j.value("retry_backoff_ms", e.retry_backoff_ms);
    e.concurrency_limit = j.value("concurrency", e.concurrency_limit);
    if (j.contains("image_mode")) {
        const std::string mode = j.at("image_mode").get<std::string>();
        if (mode == "base64") e.image_mode = ImageMode::Base64;
        else if (mode == "url") e.image_mode = ImageMode::Url;
        else throw ConfigError("unknown image_mode: " + mode);
    }
    e.image_token_surcharge = j.value("image_token_surcharge", e.image_token_surcharge);
    return e;
}

ordered_json endpoint_to_json(const EndpointConfig& e) {
    ordered_json j;
    j["base_url"] = e.base_url;
    j["path"] = e.path;
    j["model"] = e.model;
    j["api_key_env"] = e.api_key_env;
    j["timeout_ms"] = e.timeout_ms;
    j["max_attempts"] = e.max_attempts;
    j["retry_backoff_ms"] = e.retry_backoff_ms;
    j["concurrency"] = e.concurrency_limit;
    j["image_mode"] = e.image_mode == ImageMode::Base64 ? "base64" : "url";
    j["image_token_surcharge"] = e.image_token_surcharge;
    return j;
}

}  // namespace

PipelineConfig config_from_json(const ordered_json& doc) {
    PipelineConfig config;
    try {
        if (doc.contains("thresholds")) {
            const auto& t = doc.at("thresholds");
            config.thresholds.pixel_threshold =
                t.value("pixel", config.thresholds.pixel_threshold);
            config.thresholds.token_threshold =
                t.value("token", config.thresholds.token_threshold);
        }
        if (doc.contains("geometry")) {
            const auto& g = doc.at("geometry");
            config.geometry.char_width = g.value("char_width", config.geometry.char_width);
            config.geometry.cell_pad = g.value("cell_pad", config.geometry.cell_pad);
            config.geometry.row_height = g.value("row_height", config.geometry.row_height);
            config.geometry.margin = g.value("margin", config.geometry.margin);
        }
        if (doc.contains("serialization")) {
            const auto& s = doc.at("serialization");
            if (s.contains("layout"))
                config.serialization_layout =
                    table_layout_from_string(s.at("layout").get<std::string>());
            config.serialize_options.flatten_hierarchical =
                s.value("flatten_hierarchical", config.serialize_options.flatten_hierarchical);
            config.serialize_options.flatten_join =
                s.value("flatten_join", config.serialize_options.flatten_join);
        }
        if (doc.contains("prompts")) {
            const auto& p = doc.at("prompts");
            config.prompts.answer_text = p.value("answer_text", config.prompts.answer_text);
            config.prompts.answer_image = p.value("answer_image", config.prompts.answer_image);
            config.prompts.answer_both = p.value("answer_both", config.prompts.answer_both);
            config.prompts.classify = p.value("classify", config.prompts.classify);
            config.prompts.decompose = p.value("decompose", config.prompts.decompose);
            if (p.contains("system") && !p.at("system").is_null())
                config.system_text = p.at("system").get<std::string>();
        }
        if (doc.contains("endpoint")) config.endpoint = endpoint_from_json(doc.at("endpoint"));
        if (doc.contains("text_endpoint") && !doc.at("text_endpoint").is_null())
            config.text_endpoint = endpoint_from_json(doc.at("text_endpoint"));
        config.mock_script = doc.value("mock_script", config.mock_script);
        if (doc.contains("strategy"))
            config.strategy = strategy_from_string(doc.at("strategy").get<std::string>());
        config.seed = doc.value("seed", config.seed);
        if (doc.contains("classifier")) {
            const auto& c = doc.at("classifier");
            config.classifier.lexicon_path =
                c.value("lexicon_path", config.classifier.lexicon_path);
            config.classifier.lexicon_only =
                c.value("lexicon_only", config.classifier.lexicon_only);
        }
        if (doc.contains("renderer")) {
            const auto& r = doc.at("renderer");
            config.renderer.hook_command =
                r.value("hook_command", config.renderer.hook_command);
            config.renderer.template_choice =
                r.value("template", config.renderer.template_choice);
        }
        if (doc.contains("binning")) {
            const auto& b = doc.at("binning");
            config.binning.n_bins = b.value("n_bins", config.binning.n_bins);
            if (b.contains("mode")) {
                const std::string mode = b.at("mode").get<std::string>();
                if (mode == "quantile") config.binning.mode = BinMode::Quantile;
                else if (mode == "equal_width") config.binning.mode = BinMode::EqualWidth;
                else throw ConfigError("unknown bin mode: " + mode);
            }
            config.binning.measure = b.value("measure", config.binning.measure);
            if (config.binning.measure != "pixels" && config.binning.measure != "tokens")
                throw ConfigError("bin measure must be pixels or tokens");
        }
        if (doc.contains("wilcoxon"))
            config.wilcoxon.exact_cutoff =
                doc.at("wilcoxon").value("exact_cutoff", config.wilcoxon.exact_cutoff);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    if (config.thresholds.pixel_threshold <= 0 || config.thresholds.token_threshold <= 0)
        throw ConfigError("size thresholds must be strictly positive");
    return config;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    return config_from_json(doc);
}

nlohmann::ordered_json config_to_json(const PipelineConfig& config) {
    ordered_json j;
    j["thresholds"] = {{"pixel", config.thresholds.pixel_threshold},
                       {"token", config.thresholds.token_threshold}};
    j["geometry"] = {{"char_width", config.geometry.char_width},
                     {"cell_pad", config.geometry.cell_pad},
                     {"row_height", config.geometry.row_height},
                     {"margin", config.geometry.margin}};
    j["serialization"] = {
        {"layout", to_string(config.serialization_layout)},
        {"flatten_hierarchical", config.serialize_options.flatten_hierarchical},
        {"flatten_join", config.serialize_options.flatten_join}};
    ordered_json prompts;
    prompts["answer_text"] = config.prompts.answer_text;
    prompts["answer_image"] = config.prompts.answer_image;
    prompts["answer_both"] = config.prompts.answer_both;
    prompts["classify"] = config.prompts.classify;
    prompts["decompose"] = config.prompts.decompose;
    if (config.system_text) prompts["system"] = *config.system_text;
    j["prompts"] = std::move(prompts);
    j["endpoint"] = endpoint_to_json(config.endpoint);
    if (config.text_endpoint) j["text_endpoint"] = endpoint_to_json(*config.text_endpoint);
    j["mock_script"] = config.mock_script;
    j["strategy"] = to_string(config.strategy);
    j["seed"] = config.seed;
    j["classifier"] = {{"lexicon_path", config.classifier.lexicon_path},
                       {"lexicon_only", config.classifier.lexicon_only}};
    j["renderer"] = {{"hook_command", config.renderer.hook_command},
                     {"template", config.renderer.template_choice}};
    j["binning"] = {{"n_bins", config.binning.n_bins},
                    {"mode", config.binning.mode == BinMode::Quantile ? "quantile"
                                                                      : "equal_width"},
                    {"measure", config.binning.measure}};
    j["wilcoxon"] = {{"exact_cutoff", config.wilcoxon.exact_cutoff}};
    return j;
}

}  // namespace fres
