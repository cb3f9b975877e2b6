#include "fres/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace fres {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Predictions file
// ---------------------------------------------------------------------------

ordered_json prediction_row_to_json(const PredictionRow& row) {
    ordered_json j;
    j["id"] = row.id;
    j["approach"] = row.approach;
    j["prediction"] = row.prediction;
    j["input_tokens"] = row.input_tokens;
    j["decision"] = routing_decision_to_json(row.decision);
    j["backend"] = row.backend == GatewayBackend::Mock ? "mock" : "http";
    j["latency_ms"] = row.latency_ms;
    return j;
}

PredictionRow prediction_row_from_json(const ordered_json& doc) {
    PredictionRow row;
    try {
        row.id = doc.at("id").get<std::string>();
        row.approach = doc.at("approach").get<std::string>();
        row.prediction = doc.at("prediction").get<std::string>();
        row.input_tokens = doc.value("input_tokens", 0L);
        if (doc.contains("decision"))
            row.decision = routing_decision_from_json(doc.at("decision"));
        row.backend = doc.value("backend", "mock") == std::string("http")
                          ? GatewayBackend::Http
                          : GatewayBackend::Mock;
        row.latency_ms = doc.value("latency_ms", 0L);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput(std::string("prediction row: ") + e.what());
    }
    return row;
}

std::vector<PredictionRow> read_predictions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open predictions file: " + path);
    std::vector<PredictionRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ordered_json doc;
        try {
            doc = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedInput("predictions line " + std::to_string(line_no) + ": " +
                                 e.what());
        }
        rows.push_back(prediction_row_from_json(doc));
    }
    return rows;
}

std::string predictions_to_jsonl(const std::vector<PredictionRow>& rows) {
    std::ostringstream os;
    for (const PredictionRow& row : rows) os << prediction_row_to_json(row).dump() << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Gateways and classifier
// ---------------------------------------------------------------------------

std::unique_ptr<ModelGateway> make_gateway(const PipelineConfig& config,
                                           const EndpointConfig& endpoint) {
    if (!config.mock_script.empty())
        return std::make_unique<MockGateway>(MockGateway::from_script_file(
            config.mock_script, endpoint.image_token_surcharge));
    return std::make_unique<HttpGateway>(endpoint);
}

DispatchingGateway::DispatchingGateway(std::unique_ptr<ModelGateway> primary,
                                       std::unique_ptr<ModelGateway> text_only)
    : primary_(std::move(primary)), text_only_(std::move(text_only)) {}

ModelReply DispatchingGateway::complete(const PromptBundle& bundle,
                                        std::string_view request_key) {
    if (!bundle.image_payload && text_only_) return text_only_->complete(bundle, request_key);
    return primary_->complete(bundle, request_key);
}

QuestionClassifier make_classifier(const PipelineConfig& config) {
    ClassifierOptions options;
    if (!config.classifier.lexicon_path.empty())
        options.lexicon = ComparativeLexicon::from_file(config.classifier.lexicon_path);
    options.llm_template = config.prompts.classify;
    options.layout = config.serialization_layout;
    options.serialize_options = config.serialize_options;
    options.lexicon_only = config.classifier.lexicon_only;
    return QuestionClassifier(std::move(options));
}

RoutingDecision fixed_decision(Strategy strategy) {
    RoutingDecision decision;
    switch (strategy) {
        case Strategy::TextOnly:
            decision.representations = RepresentationSet::text_only();
            decision.rationale = "strategy:text";
            break;
        case Strategy::ImageOnly:
            decision.representations = RepresentationSet::image_only();
            decision.rationale = "strategy:image";
            break;
        case Strategy::Both:
            decision.representations = RepresentationSet::both();
            decision.rationale = "strategy:both";
            break;
        case Strategy::Fres:
            throw ConfigError("fres strategy routes per instance, not as a fixed decision");
    }
    return decision;
}

// ---------------------------------------------------------------------------
// Batch dispatch
// ---------------------------------------------------------------------------

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception
// wins and is rethrown after all workers drain.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const int worker_count = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (worker_count == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        });
    }
    for (std::thread& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<PredictionRow> run_predictions(const PipelineConfig& config,
                                           const std::vector<QAInstance>& corpus,
                                           ModelGateway& gateway,
                                           const std::string& approach_label) {
    const std::string label =
        approach_label.empty() ? to_string(config.strategy) : approach_label;
    const QuestionClassifier classifier = make_classifier(config);

    RouteInstanceOptions route_options;
    route_options.estimate = config.estimate_options();
    route_options.renderer_hook_available = !config.renderer.hook_command.empty();

    PromptBuildOptions prompt_options;
    prompt_options.templates = config.prompts;
    prompt_options.layout = config.serialization_layout;
    prompt_options.serialize_options = config.serialize_options;
    prompt_options.image_mode = config.endpoint.image_mode;
    prompt_options.system_text = config.system_text;

    std::vector<PredictionRow> rows(corpus.size());
    parallel_for(corpus.size(), config.endpoint.concurrency_limit, [&](std::size_t i) {
        const QAInstance& instance = corpus[i];
        RoutingDecision decision =
            config.strategy == Strategy::Fres
                ? route_instance(instance, classifier, &gateway, route_options)
                : fixed_decision(config.strategy);
        PromptBundle bundle = build_prompt(instance, decision, prompt_options);
        ModelReply reply = gateway.complete(bundle, instance.id);

        PredictionRow row;
        row.id = instance.id;
        row.approach = label;
        row.prediction = reply.text;
        row.input_tokens = reply.input_token_estimate;
        row.decision = std::move(decision);
        row.backend = reply.backend;
        row.latency_ms = static_cast<long>(reply.latency.count());
        rows[i] = std::move(row);
    });

    std::sort(rows.begin(), rows.end(), [](const PredictionRow& a, const PredictionRow& b) {
        return a.id != b.id ? a.id < b.id : a.approach < b.approach;
    });
    return rows;
}

EvalReport evaluate_rows(const PipelineConfig& config,
                         const std::vector<QAInstance>& corpus,
                         const std::vector<PredictionRow>& rows) {
    std::vector<PredictionRecord> records;
    records.reserve(rows.size());
    for (const PredictionRow& row : rows) {
        PredictionRecord record;
        record.id = row.id;
        record.approach = row.approach;
        record.prediction = row.prediction;
        record.input_tokens = row.input_tokens;
        record.used_image = row.decision.representations.image;
        records.push_back(std::move(record));
    }

    std::vector<BinInput> bin_inputs;
    bin_inputs.reserve(corpus.size());
    const EstimateOptions estimate_options = config.estimate_options();
    for (const QAInstance& inst : corpus) {
        const SizeEstimate estimate = estimate_instance(inst, estimate_options);
        BinInput input;
        input.id = inst.id;
        input.size_measure = config.binning.measure == "tokens"
                                 ? static_cast<double>(estimate.token_count)
                                 : estimate.pixel_area;
        bin_inputs.push_back(std::move(input));
    }

    EvalReportOptions options;
    options.n_bins = config.binning.n_bins;
    options.bin_mode = config.binning.mode;
    options.bin_measure = config.binning.measure;
    options.wilcoxon = config.wilcoxon;
    return evaluate_predictions(corpus, records, bin_inputs, options);
}

RunOutcome run_pipeline(const PipelineConfig& config,
                        const std::vector<QAInstance>& corpus) {
    if (corpus.empty()) throw MalformedInput("cannot run on an empty corpus");
    std::unique_ptr<ModelGateway> primary = make_gateway(config, config.endpoint);
    std::unique_ptr<ModelGateway> gateway;
    if (config.text_endpoint) {
        gateway = std::make_unique<DispatchingGateway>(
            std::move(primary), make_gateway(config, *config.text_endpoint));
    } else {
        gateway = std::move(primary);
    }

    RunOutcome outcome;
    outcome.predictions = run_predictions(config, corpus, *gateway);
    outcome.report = evaluate_rows(config, corpus, outcome.predictions);
    return outcome;
}

// ---------------------------------------------------------------------------
// Rendering stage
// ---------------------------------------------------------------------------

namespace {

std::string sanitize_filename(const std::string& id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                        c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "instance" : out;
}

std::string substitute_all(std::string text, const std::string& from,
                           const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace

RenderOutcome render_corpus(const std::vector<QAInstance>& corpus,
                            const std::string& out_dir, const PipelineConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    // Stable template assignment: instances in id order, one seeded draw each.
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return corpus[a].id < corpus[b].id;
    });

    const bool random_template = config.renderer.template_choice == "random";
    RenderTemplate fixed;
    if (!random_template)
        fixed.id = template_id_from_string(config.renderer.template_choice);

    RenderOutcome outcome;
    outcome.corpus = corpus;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        QAInstance& instance = outcome.corpus[order[rank]];
        const RenderTemplate render_template =
            random_template ? pick_template(config.seed, rank) : fixed;
        const std::string html = render_html(instance.table, render_template);
        const fs::path html_path =
            fs::path(out_dir) / (sanitize_filename(instance.id) + ".html");
        {
            std::ofstream out(html_path, std::ios::binary);
            if (!out) throw IoError("cannot write " + html_path.string());
            out << html;
        }
        outcome.html_files.push_back(html_path.string());
        instance.metadata["render_template"] = to_string(render_template.id);

        if (!config.renderer.hook_command.empty()) {
            const fs::path image_path =
                fs::path(out_dir) / (sanitize_filename(instance.id) + ".png");
            std::string command = config.renderer.hook_command;
            command = substitute_all(command, "{html}", html_path.string());
            command = substitute_all(command, "{out}", image_path.string());
            const int status = std::system(command.c_str());
            if (status != 0)
                throw IoError("renderer hook failed (exit " + std::to_string(status) +
                              "): " + command);
            instance.image_ref = image_path.string();
        }
    }
    return outcome;
}

}  // namespace fres
