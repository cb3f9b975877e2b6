// fres: table representation selection toolkit command line.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 gateway error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fres/pipeline.hpp"

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fres::IoError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fres::IoError("cannot write file: " + path);
    out << content;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
    } else {
        write_file(out_path, text);
    }
}

struct CommonArgs {
    std::string config_path;
    std::string mock_script;
    std::string strategy;
    std::optional<std::uint64_t> seed;

    fres::PipelineConfig load() const {
        fres::PipelineConfig config;
        if (!config_path.empty()) config = fres::load_config(config_path);
        if (!mock_script.empty()) config.mock_script = mock_script;
        if (!strategy.empty()) config.strategy = fres::strategy_from_string(strategy);
        if (seed) config.seed = *seed;
        return config;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "pipeline configuration file (JSON)");
    cmd->add_option("--mock-script", args.mock_script,
                    "mock gateway script file; overrides config");
    cmd->add_option("--seed", args.seed, "seed override");
}

std::unique_ptr<fres::ModelGateway> build_gateway(const fres::PipelineConfig& config) {
    auto primary = fres::make_gateway(config, config.endpoint);
    if (!config.text_endpoint) return primary;
    return std::make_unique<fres::DispatchingGateway>(
        std::move(primary), fres::make_gateway(config, *config.text_endpoint));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fres: feature-based table representation selection toolkit"};
    app.require_subcommand(1);

    // parse ------------------------------------------------------------
    std::string parse_input, parse_format = "markdown", parse_out;
    bool parse_no_csv_header = false;
    CommonArgs parse_common;
    auto* cmd_parse = app.add_subcommand("parse", "parse a raw table file into table JSON");
    cmd_parse->add_option("--input", parse_input, "table file")->required();
    cmd_parse->add_option("--format", parse_format, "markdown|html|csv|json|native");
    cmd_parse->add_flag("--no-csv-header", parse_no_csv_header,
                        "treat the first CSV row as data");
    cmd_parse->add_option("--out", parse_out, "output path (default stdout)");
    add_common(cmd_parse, parse_common);

    // estimate-size ------------------------------------------------------
    std::string est_corpus, est_out;
    CommonArgs est_common;
    auto* cmd_estimate =
        app.add_subcommand("estimate-size", "token/pixel measures and size classes");
    cmd_estimate->add_option("--corpus", est_corpus, "corpus file (JSONL)")->required();
    cmd_estimate->add_option("--out", est_out, "output path (default stdout)");
    add_common(cmd_estimate, est_common);

    // render -------------------------------------------------------------
    std::string render_corpus_path, render_dir, render_template, render_hook,
        render_corpus_out;
    CommonArgs render_common;
    auto* cmd_render = app.add_subcommand("render", "emit one HTML file per instance");
    cmd_render->add_option("--corpus", render_corpus_path, "corpus file")->required();
    cmd_render->add_option("--out", render_dir, "output directory")->required();
    cmd_render->add_option("--template", render_template,
                           "borderless|full_borders|partial_borders|wide_spacing|random");
    cmd_render->add_option("--hook", render_hook,
                           "rasterizer command with {html} and {out} placeholders");
    cmd_render->add_option("--corpus-out", render_corpus_out,
                           "write the corpus with image_ref updates here");
    add_common(cmd_render, render_common);

    // classify-question ----------------------------------------------------
    std::string cls_corpus, cls_mode = "inference", cls_out, cls_lexicon;
    bool cls_lexicon_only = false;
    CommonArgs cls_common;
    auto* cmd_classify =
        app.add_subcommand("classify-question", "annotate question complexity");
    cmd_classify->add_option("--corpus", cls_corpus, "corpus file")->required();
    cmd_classify->add_option("--mode", cls_mode, "inference|construction");
    cmd_classify->add_option("--out", cls_out, "annotated corpus output");
    cmd_classify->add_option("--lexicon", cls_lexicon, "comparative lexicon file");
    cmd_classify->add_flag("--lexicon-only", cls_lexicon_only,
                           "rules only, never consult the gateway");
    add_common(cmd_classify, cls_common);

    // route ----------------------------------------------------------------
    std::string route_corpus, route_out;
    CommonArgs route_common;
    auto* cmd_route = app.add_subcommand("route", "print routing decisions");
    cmd_route->add_option("--corpus", route_corpus, "corpus file")->required();
    cmd_route->add_option("--out", route_out, "output path (default stdout)");
    add_common(cmd_route, route_common);

    // ask --------------------------------------------------------------------
    std::string ask_corpus, ask_out, ask_label, ask_strategy;
    CommonArgs ask_common;
    auto* cmd_ask = app.add_subcommand("ask", "dispatch prompts, write predictions");
    cmd_ask->add_option("--corpus", ask_corpus, "corpus file")->required();
    cmd_ask->add_option("--out", ask_out, "predictions output (JSONL)");
    cmd_ask->add_option("--strategy", ask_strategy, "fres|text|image|both");
    cmd_ask->add_option("--label", ask_label, "approach label (default: strategy name)");
    add_common(cmd_ask, ask_common);

    // run ----------------------------------------------------------------------
    std::string run_corpus, run_predictions_out, run_report_out, run_strategy;
    CommonArgs run_common;
    auto* cmd_run = app.add_subcommand("run", "full pipeline: predictions plus report");
    cmd_run->add_option("--corpus", run_corpus, "corpus file")->required();
    cmd_run->add_option("--predictions-out", run_predictions_out, "predictions path");
    cmd_run->add_option("--report-out", run_report_out, "report path (default stdout)");
    cmd_run->add_option("--strategy", run_strategy, "fres|text|image|both");
    add_common(cmd_run, run_common);

    // evaluate ------------------------------------------------------------------
    std::string eval_corpus, eval_predictions, eval_out, eval_bins_csv, eval_repredictions;
    CommonArgs eval_common;
    auto* cmd_evaluate = app.add_subcommand("evaluate", "score a predictions file");
    cmd_evaluate->add_option("--corpus", eval_corpus, "corpus file")->required();
    cmd_evaluate->add_option("--predictions", eval_predictions, "predictions file")
        ->required();
    cmd_evaluate->add_option("--out", eval_out, "report output (default stdout)");
    cmd_evaluate->add_option("--bins-csv", eval_bins_csv, "write bin curves as CSV");
    cmd_evaluate->add_option("--repredictions", eval_repredictions,
                             "error-analysis re-predictions file (JSONL)");
    add_common(cmd_evaluate, eval_common);

    // build-benchmark ---------------------------------------------------------
    std::string bb_pool, bb_quotas, bb_out, bb_stats_out;
    std::optional<double> bb_balance;
    CommonArgs bb_common;
    auto* cmd_build = app.add_subcommand("build-benchmark", "stratified quota sampling");
    cmd_build->add_option("--pool", bb_pool, "classified instance pool (JSONL)")->required();
    cmd_build->add_option("--quotas", bb_quotas, "quota file (JSON)")->required();
    cmd_build->add_option("--out", bb_out, "benchmark corpus output")->required();
    cmd_build->add_option("--stats-out", bb_stats_out, "statistics sidecar path");
    cmd_build->add_option("--balance", bb_balance,
                          "target flat-table fraction, e.g. 0.5");
    add_common(cmd_build, bb_common);

    // stats ----------------------------------------------------------------------
    std::string stats_corpus, stats_out;
    CommonArgs stats_common;
    auto* cmd_stats = app.add_subcommand("stats", "corpus statistics");
    cmd_stats->add_option("--corpus", stats_corpus, "corpus file")->required();
    cmd_stats->add_option("--out", stats_out, "output path (default stdout)");
    add_common(cmd_stats, stats_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? 0 : 1;
    }

    try {
        if (*cmd_parse) {
            auto config = parse_common.load();
            fres::ParseOptions options;
            options.csv_has_header = !parse_no_csv_header;
            fres::Table table = fres::parse_table(
                read_file(parse_input), fres::source_format_from_string(parse_format),
                options);
            emit(fres::table_to_json(table).dump(2), parse_out);
        } else if (*cmd_estimate) {
            auto config = est_common.load();
            auto corpus = fres::read_corpus(est_corpus);
            std::ostringstream os;
            for (const auto& inst : corpus) {
                auto estimate = fres::estimate_instance(inst, config.estimate_options());
                ordered_json j = fres::size_estimate_to_json(estimate);
                j["id"] = inst.id;
                os << j.dump() << '\n';
            }
            emit(os.str(), est_out);
        } else if (*cmd_render) {
            auto config = render_common.load();
            if (!render_template.empty()) config.renderer.template_choice = render_template;
            if (!render_hook.empty()) config.renderer.hook_command = render_hook;
            auto corpus = fres::read_corpus(render_corpus_path);
            auto outcome = fres::render_corpus(corpus, render_dir, config);
            if (!render_corpus_out.empty())
                fres::write_corpus(outcome.corpus, render_corpus_out);
            std::cout << "rendered " << outcome.html_files.size() << " tables to "
                      << render_dir << '\n';
        } else if (*cmd_classify) {
            auto config = cls_common.load();
            if (!cls_lexicon.empty()) config.classifier.lexicon_path = cls_lexicon;
            if (cls_lexicon_only) config.classifier.lexicon_only = true;
            const auto mode = cls_mode == "construction" ? fres::ClassifyMode::Construction
                              : cls_mode == "inference"
                                  ? fres::ClassifyMode::Inference
                                  : throw fres::ConfigError("unknown mode: " + cls_mode);
            auto corpus = fres::read_corpus(cls_corpus);
            auto classifier = fres::make_classifier(config);
            std::unique_ptr<fres::ModelGateway> gateway;
            if (!config.classifier.lexicon_only) gateway = build_gateway(config);
            for (auto& inst : corpus) {
                auto result = classifier.classify(
                    inst.question, inst.table,
                    mode == fres::ClassifyMode::Construction ? &inst.gold_answers : nullptr,
                    gateway.get(), mode, "classify:" + inst.id);
                inst.question_type = result.label;
                inst.metadata["classifier_stage"] = fres::to_string(result.stage);
            }
            if (cls_out.empty()) {
                std::cout << fres::corpus_to_jsonl(corpus);
            } else {
                fres::write_corpus(corpus, cls_out);
            }
        } else if (*cmd_route) {
            auto config = route_common.load();
            auto corpus = fres::read_corpus(route_corpus);
            auto classifier = fres::make_classifier(config);
            std::unique_ptr<fres::ModelGateway> gateway;
            if (!config.classifier.lexicon_only) gateway = build_gateway(config);
            fres::RouteInstanceOptions options;
            options.estimate = config.estimate_options();
            options.renderer_hook_available = !config.renderer.hook_command.empty();
            std::ostringstream os;
            for (const auto& inst : corpus) {
                auto decision =
                    fres::route_instance(inst, classifier, gateway.get(), options);
                ordered_json j = fres::routing_decision_to_json(decision);
                j["id"] = inst.id;
                os << j.dump() << '\n';
            }
            emit(os.str(), route_out);
        } else if (*cmd_ask || *cmd_run) {
            const bool run_mode = static_cast<bool>(*cmd_run);
            auto config = run_mode ? run_common.load() : ask_common.load();
            const std::string& strategy = run_mode ? run_strategy : ask_strategy;
            if (!strategy.empty()) config.strategy = fres::strategy_from_string(strategy);
            auto corpus = fres::read_corpus(run_mode ? run_corpus : ask_corpus);
            if (corpus.empty()) throw fres::MalformedInput("corpus is empty");
            if (run_mode) {
                auto outcome = fres::run_pipeline(config, corpus);
                if (!run_predictions_out.empty())
                    write_file(run_predictions_out,
                               fres::predictions_to_jsonl(outcome.predictions));
                emit(fres::eval_report_to_json(outcome.report).dump(2), run_report_out);
            } else {
                auto gateway = build_gateway(config);
                auto rows = fres::run_predictions(config, corpus, *gateway, ask_label);
                emit(fres::predictions_to_jsonl(rows), ask_out);
            }
        } else if (*cmd_evaluate) {
            auto config = eval_common.load();
            auto corpus = fres::read_corpus(eval_corpus);
            auto rows = fres::read_predictions(eval_predictions);
            auto report = fres::evaluate_rows(config, corpus, rows);
            if (!eval_repredictions.empty()) {
                std::vector<fres::ErrorCase> cases;
                std::istringstream in(read_file(eval_repredictions));
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    ordered_json doc = ordered_json::parse(line);
                    fres::ErrorCase error_case;
                    error_case.id = doc.at("id").get<std::string>();
                    error_case.correct_by_representation =
                        doc.at("correct").get<std::map<std::string, bool>>();
                    error_case.predicted_type = fres::question_type_from_string(
                        doc.at("predicted_type").get<std::string>());
                    error_case.gold_type = fres::question_type_from_string(
                        doc.at("gold_type").get<std::string>());
                    cases.push_back(std::move(error_case));
                }
                auto counts = fres::categorize_errors(cases);
                for (const auto& [category, count] : counts)
                    report.error_breakdown[fres::to_string(category)] =
                        cases.empty() ? 0.0 : 100.0 * count / static_cast<double>(cases.size());
            }
            if (!eval_bins_csv.empty())
                write_file(eval_bins_csv, fres::bin_curves_to_csv(report.bin_curves));
            emit(fres::eval_report_to_json(report).dump(2), eval_out);
        } else if (*cmd_build) {
            auto config = bb_common.load();
            auto pool = fres::read_corpus(bb_pool);
            auto quotas = fres::read_quota_file(bb_quotas);
            fres::SampleOptions options;
            options.estimate = config.estimate_options();
            options.seed = config.seed;
            if (bb_balance) options.structure_balance = *bb_balance;
            auto result = fres::stratify_and_sample(pool, quotas, options);
            fres::write_corpus(result.corpus, bb_out);
            if (!bb_stats_out.empty()) write_file(bb_stats_out, result.stats.dump(2));
            std::cout << "sampled " << result.corpus.size() << " instances to " << bb_out
                      << '\n';
        } else if (*cmd_stats) {
            auto config = stats_common.load();
            auto corpus = fres::read_corpus(stats_corpus);
            emit(fres::summarize_corpus(corpus, config.estimate_options()).dump(2),
                 stats_out);
        }
    } catch (const fres::Error& e) {
        ordered_json err;
        err["error"] = {{"type", e.code()}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        switch (e.kind()) {
            case fres::ErrorKind::Usage: return 1;
            case fres::ErrorKind::Data: return 2;
            case fres::ErrorKind::Gateway: return 3;
        }
        return 2;
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = {{"type", "internal"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 2;
    }
    return 0;
}
