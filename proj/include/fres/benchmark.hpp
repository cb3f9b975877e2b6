#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fres/corpus.hpp"
#include "fres/gateway.hpp"
#include "fres/size.hpp"

namespace fres {

// One benchmark cell: a (size, complexity) setting with per-dataset counts.
struct QuotaSpec {
    SizeClass size = SizeClass::Small;  // Small or Big
    QuestionType complexity = QuestionType::Retrieval;
    std::map<std::string, int> per_dataset;

    std::string setting_name() const;
};

std::vector<QuotaSpec> quotas_from_json(const nlohmann::ordered_json& doc);
std::vector<QuotaSpec> read_quota_file(const std::string& path);

struct SampleOptions {
    EstimateOptions estimate = {};
    // Target fraction of flat tables over the whole output; 0.5 reproduces
    // an even flat/hierarchical split. Reached by swapping lowest-ranked
    // surplus-structure picks for next-ranked opposite-structure candidates.
    std::optional<double> structure_balance;
    std::uint64_t seed = 0;
    // Datasets restricted to one size side; a quota that contradicts a
    // restriction is a configuration error.
    std::map<std::string, SizeClass> dataset_size_restriction = {
        {"TabMWP", SizeClass::Small},
        {"TempTabTQA", SizeClass::Big},
    };
};

struct BenchmarkResult {
    std::vector<QAInstance> corpus;
    nlohmann::ordered_json stats;
};

// The collection pipeline over a classified pool: per (dataset, setting)
// keep instances of the right question type and benchmark size class, rank
// by size measure (ascending for Small cells, descending for Big, ties by
// id), take the top k, then optionally rebalance table structures.
// Deterministic given pool order and seed. Throws InsufficientPool with the
// full shortfall list when any cell cannot be filled.
BenchmarkResult stratify_and_sample(const std::vector<QAInstance>& pool,
                                    const std::vector<QuotaSpec>& quotas,
                                    const SampleOptions& options = {});

// ---------------------------------------------------------------------------
// Statement-to-QA conversion
// ---------------------------------------------------------------------------

struct StatementRecord {
    std::string id;
    std::string statement;
    bool label = false;  // only true statements convert
};

struct ConversionRecord {
    std::string id;
    std::string statement;
    std::string generated_question;
    std::string generated_answer;
    bool answer_in_statement = true;
};

struct ConversionOptions {
    std::string template_text = PromptTemplates::defaults().decompose;
    // Majority vote over this many decomposition runs per statement.
    int n_runs = 1;
};

struct ConversionOutcome {
    std::vector<ConversionRecord> records;  // retained: answer found in statement
    int input_count = 0;
    int dropped_false = 0;
    int excluded_answer_missing = 0;
    double retention_rate = 0;  // retained / converted true statements
};

ConversionOutcome convert_statements(const std::vector<StatementRecord>& statements,
                                     ModelGateway& gateway,
                                     const ConversionOptions& options = {});

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

// Per-dataset and per-setting averages of question/table/answer token
// lengths, pixel areas and cell counts.
nlohmann::ordered_json summarize_corpus(const std::vector<QAInstance>& corpus,
                                        const EstimateOptions& options = {});

}  // namespace fres
