#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fres/benchmark.hpp"
#include "fres/classify.hpp"
#include "fres/config.hpp"
#include "fres/corpus.hpp"
#include "fres/evaluate.hpp"
#include "fres/gateway.hpp"
#include "fres/render.hpp"
#include "fres/router.hpp"

namespace fres {

// One line of the predictions file.
struct PredictionRow {
    std::string id;
    std::string approach;
    std::string prediction;
    long input_tokens = 0;
    RoutingDecision decision;
    GatewayBackend backend = GatewayBackend::Mock;
    long latency_ms = 0;
};

nlohmann::ordered_json prediction_row_to_json(const PredictionRow& row);
PredictionRow prediction_row_from_json(const nlohmann::ordered_json& doc);
std::vector<PredictionRow> read_predictions(const std::string& path);
std::string predictions_to_jsonl(const std::vector<PredictionRow>& rows);

// Primary (and optional text-ablation) gateway per config: the scripted
// backend when mock_script is set, the HTTP backend otherwise.
std::unique_ptr<ModelGateway> make_gateway(const PipelineConfig& config,
                                           const EndpointConfig& endpoint);

// Dispatches image-less bundles to the text-ablation endpoint when one is
// configured; everything else goes to the primary endpoint.
class DispatchingGateway final : public ModelGateway {
public:
    DispatchingGateway(std::unique_ptr<ModelGateway> primary,
                       std::unique_ptr<ModelGateway> text_only);
    ModelReply complete(const PromptBundle& bundle,
                        std::string_view request_key = {}) override;

private:
    std::unique_ptr<ModelGateway> primary_;
    std::unique_ptr<ModelGateway> text_only_;
};

QuestionClassifier make_classifier(const PipelineConfig& config);

// Decision for a fixed (non-FRES) strategy.
RoutingDecision fixed_decision(Strategy strategy);

// Route, prompt and complete each corpus instance under the configured
// strategy. Dispatch runs on up to endpoint.concurrency threads; rows come
// back sorted by instance id, so reruns are byte-identical with a scripted
// backend. approach_label defaults to the strategy name.
std::vector<PredictionRow> run_predictions(const PipelineConfig& config,
                                           const std::vector<QAInstance>& corpus,
                                           ModelGateway& gateway,
                                           const std::string& approach_label = {});

struct RunOutcome {
    std::vector<PredictionRow> predictions;
    EvalReport report;
};

// Predictions plus the evaluation report in one pass. Throws MalformedInput
// on an empty corpus.
RunOutcome run_pipeline(const PipelineConfig& config,
                        const std::vector<QAInstance>& corpus);

// Scores a predictions file against a corpus: bin curves use the configured
// measure, efficiency compares the "fres" and "both" approach labels.
EvalReport evaluate_rows(const PipelineConfig& config,
                         const std::vector<QAInstance>& corpus,
                         const std::vector<PredictionRow>& rows);

// ---------------------------------------------------------------------------
// Rendering stage
// ---------------------------------------------------------------------------

struct RenderOutcome {
    std::vector<QAInstance> corpus;  // image_ref updated when the hook ran
    std::vector<std::string> html_files;
};

// Writes <out_dir>/<id>.html per instance (template from config: fixed id or
// seeded uniform choice). When a hook command is configured it runs per file
// with {html} and {out} substituted, and the produced image path lands in
// image_ref.
RenderOutcome render_corpus(const std::vector<QAInstance>& corpus,
                            const std::string& out_dir, const PipelineConfig& config);

}  // namespace fres
