#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fres/evaluate.hpp"
#include "fres/gateway.hpp"
#include "fres/render.hpp"
#include "fres/size.hpp"

namespace fres {

// The four compared approaches: fixed text / image / both, or the
// feature-based selection.
enum class Strategy { Fres, TextOnly, ImageOnly, Both };

const char* to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

struct ClassifierConfig {
    std::string lexicon_path;  // empty = built-in defaults
    bool lexicon_only = false;
};

struct RendererConfig {
    // External rasterizer; "{html}" and "{out}" expand to file paths.
    std::string hook_command;
    std::string template_choice = "random";  // template id or "random"
};

struct BinningConfig {
    int n_bins = 6;
    BinMode mode = BinMode::Quantile;
    std::string measure = "pixels";  // or "tokens"
};

struct PipelineConfig {
    SizeThresholds thresholds;
    LayoutGeometry geometry;
    TableLayout serialization_layout = TableLayout::Markdown;
    SerializeOptions serialize_options;
    PromptTemplates prompts = PromptTemplates::defaults();
    std::optional<std::string> system_text;
    EndpointConfig endpoint;
    // Ablation knob: bundles without an image go to this endpoint instead.
    std::optional<EndpointConfig> text_endpoint;
    std::string mock_script;  // non-empty selects the scripted backend
    Strategy strategy = Strategy::Fres;
    std::uint64_t seed = 0;
    ClassifierConfig classifier;
    RendererConfig renderer;
    BinningConfig binning;
    WilcoxonOptions wilcoxon;

    EstimateOptions estimate_options() const {
        EstimateOptions options;
        options.serialization_layout = serialization_layout;
        options.serialize_options = serialize_options;
        options.geometry = geometry;
        options.thresholds = thresholds;
        return options;
    }
};

PipelineConfig config_from_json(const nlohmann::ordered_json& doc);
PipelineConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const PipelineConfig& config);

}  // namespace fres
