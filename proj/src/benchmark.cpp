#include "fres/benchmark.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>

#include "fres/normalize.hpp"

namespace fres {

using nlohmann::ordered_json;

std::string QuotaSpec::setting_name() const {
    return std::string(size == SizeClass::Big ? "big" : "small") + "_" +
           to_string(complexity);
}

std::vector<QuotaSpec> quotas_from_json(const ordered_json& doc) {
    if (!doc.is_object() || !doc.contains("settings"))
        throw MalformedInput("quota file must contain a \"settings\" array");
    std::vector<QuotaSpec> quotas;
    for (const auto& entry : doc.at("settings")) {
        QuotaSpec spec;
        const std::string size = entry.at("size").get<std::string>();
        spec.size = size_class_from_string(size);
        if (spec.size == SizeClass::Excluded)
            throw MalformedInput("quota setting size must be small or big");
        spec.complexity = question_type_from_string(entry.at("complexity").get<std::string>());
        spec.per_dataset = entry.at("quotas").get<std::map<std::string, int>>();
        for (const auto& [dataset, k] : spec.per_dataset)
            if (k <= 0)
                throw MalformedInput("quota for " + dataset + " must be positive");
        quotas.push_back(std::move(spec));
    }
    if (quotas.empty()) throw MalformedInput("quota file declares no settings");
    return quotas;
}

std::vector<QuotaSpec> read_quota_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open quota file: " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput("quota file " + path + ": " + e.what());
    }
    return quotas_from_json(doc);
}

// ---------------------------------------------------------------------------
// Stratified sampling
// ---------------------------------------------------------------------------

namespace {

struct PoolEntry {
    const QAInstance* instance = nullptr;
    double size_measure = 0;
    SizeClass benchmark_class = SizeClass::Excluded;
    TableStructure structure = TableStructure::Flat;
};

struct SampleCell {
    const QuotaSpec* quota = nullptr;
    std::string dataset;
    int k = 0;
    std::vector<const PoolEntry*> ranked;  // eligible, in pick order
    std::vector<bool> selected;            // parallel to ranked
};

}  // namespace

BenchmarkResult stratify_and_sample(const std::vector<QAInstance>& pool,
                                    const std::vector<QuotaSpec>& quotas,
                                    const SampleOptions& options) {
    for (const QuotaSpec& quota : quotas) {
        for (const auto& [dataset, _] : quota.per_dataset) {
            auto it = options.dataset_size_restriction.find(dataset);
            if (it != options.dataset_size_restriction.end() && it->second != quota.size)
                throw ConfigError("dataset " + dataset + " is restricted to " +
                                  std::string(to_string(it->second)) +
                                  " tables but quoted in a " +
                                  std::string(to_string(quota.size)) + " setting");
        }
    }

    std::vector<PoolEntry> entries;
    entries.reserve(pool.size());
    for (const QAInstance& inst : pool) {
        if (!inst.question_type)
            throw MalformedInput("pool instance " + inst.id + " has no question_type");
        PoolEntry entry;
        entry.instance = &inst;
        const SizeEstimate estimate = estimate_instance(inst, options.estimate);
        entry.size_measure = estimate.pixel_area;
        entry.benchmark_class = estimate.classification_benchmark;
        entry.structure = inst.table.structure();
        entries.push_back(entry);
    }

    std::vector<SampleCell> cells;
    std::vector<InsufficientPool::Shortfall> shortfalls;
    for (const QuotaSpec& quota : quotas) {
        for (const auto& [dataset, k] : quota.per_dataset) {
            SampleCell cell;
            cell.quota = &quota;
            cell.dataset = dataset;
            cell.k = k;
            for (const PoolEntry& entry : entries) {
                if (entry.instance->dataset != dataset) continue;
                if (*entry.instance->question_type != quota.complexity) continue;
                if (entry.benchmark_class != quota.size) continue;
                cell.ranked.push_back(&entry);
            }
            const bool ascending = quota.size == SizeClass::Small;
            std::sort(cell.ranked.begin(), cell.ranked.end(),
                      [ascending](const PoolEntry* a, const PoolEntry* b) {
                          if (a->size_measure != b->size_measure)
                              return ascending ? a->size_measure < b->size_measure
                                               : a->size_measure > b->size_measure;
                          return a->instance->id < b->instance->id;
                      });
            if (static_cast<int>(cell.ranked.size()) < k)
                shortfalls.push_back({dataset, quota.setting_name(), k,
                                      static_cast<int>(cell.ranked.size())});
            cell.selected.assign(cell.ranked.size(), false);
            for (int i = 0; i < std::min<int>(k, cell.ranked.size()); ++i)
                cell.selected[static_cast<std::size_t>(i)] = true;
            cells.push_back(std::move(cell));
        }
    }
    if (!shortfalls.empty()) {
        std::string message = "pool cannot satisfy quotas:";
        for (const auto& s : shortfalls)
            message += " " + s.dataset + "/" + s.setting + " needs " +
                       std::to_string(s.requested) + " has " + std::to_string(s.available) + ";";
        throw InsufficientPool(message, std::move(shortfalls));
    }

    // Structure balance: swap the lowest-ranked surplus-structure pick of a
    // cell for that cell's next-ranked opposite-structure candidate, visiting
    // cells round-robin until the target is met or no swap is possible.
    if (options.structure_balance) {
        const double target = *options.structure_balance;
        long total = 0, flat = 0;
        for (const SampleCell& cell : cells)
            for (std::size_t i = 0; i < cell.ranked.size(); ++i)
                if (cell.selected[i]) {
                    ++total;
                    if (cell.ranked[i]->structure == TableStructure::Flat) ++flat;
                }
        long desired_flat = std::lround(target * static_cast<double>(total));
        std::size_t cursor = 0;
        while (flat != desired_flat && !cells.empty()) {
            const bool surplus_flat = flat > desired_flat;
            const TableStructure surplus =
                surplus_flat ? TableStructure::Flat : TableStructure::Hierarchical;
            bool swapped = false;
            for (std::size_t step = 0; step < cells.size(); ++step) {
                SampleCell& cell = cells[(cursor + step) % cells.size()];
                int drop = -1, add = -1;
                for (int i = static_cast<int>(cell.ranked.size()) - 1; i >= 0; --i)
                    if (cell.selected[static_cast<std::size_t>(i)] &&
                        cell.ranked[static_cast<std::size_t>(i)]->structure == surplus) {
                        drop = i;
                        break;
                    }
                for (std::size_t i = 0; i < cell.ranked.size(); ++i)
                    if (!cell.selected[i] && cell.ranked[i]->structure != surplus) {
                        add = static_cast<int>(i);
                        break;
                    }
                if (drop >= 0 && add >= 0) {
                    cell.selected[static_cast<std::size_t>(drop)] = false;
                    cell.selected[static_cast<std::size_t>(add)] = true;
                    flat += surplus_flat ? -1 : 1;
                    cursor = (cursor + step + 1) % cells.size();
                    swapped = true;
                    break;
                }
            }
            if (!swapped) break;  // infeasible; achieved balance goes in stats
        }
    }

    BenchmarkResult result;
    ordered_json cell_stats = ordered_json::array();
    long flat_count = 0, hier_count = 0;
    for (const SampleCell& cell : cells) {
        int taken = 0;
        for (std::size_t i = 0; i < cell.ranked.size(); ++i) {
            if (!cell.selected[i]) continue;
            const PoolEntry& entry = *cell.ranked[i];
            QAInstance out = *entry.instance;
            out.size_class = cell.quota->size;
            out.metadata["setting"] = cell.quota->setting_name();
            out.metadata["size_measure"] = std::to_string(entry.size_measure);
            result.corpus.push_back(std::move(out));
            ++taken;
            if (entry.structure == TableStructure::Flat) ++flat_count;
            else ++hier_count;
        }
        ordered_json stat;
        stat["setting"] = cell.quota->setting_name();
        stat["dataset"] = cell.dataset;
        stat["count"] = taken;
        cell_stats.push_back(std::move(stat));
    }
    result.stats["total"] = static_cast<long>(result.corpus.size());
    result.stats["cells"] = std::move(cell_stats);
    result.stats["flat"] = flat_count;
    result.stats["hierarchical"] = hier_count;
    result.stats["seed"] = options.seed;
    if (options.structure_balance)
        result.stats["structure_balance_target"] = *options.structure_balance;
    return result;
}

// ---------------------------------------------------------------------------
// Statement conversion
// ---------------------------------------------------------------------------

namespace {

struct DecomposedPair {
    std::string question;
    std::string answer;
};

std::optional<std::string> line_value(std::string_view line, std::string_view prefix) {
    if (line.size() < prefix.size()) return std::nullopt;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(line[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return std::nullopt;
    std::string_view rest = line.substr(prefix.size());
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t'))
        rest.remove_prefix(1);
    while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t' || rest.back() == '\r'))
        rest.remove_suffix(1);
    return std::string(rest);
}

DecomposedPair parse_decomposition(const std::string& reply) {
    // JSON object first, then "Question: ... / Answer: ..." lines.
    try {
        auto doc = nlohmann::json::parse(reply);
        if (doc.is_object() && doc.contains("question") && doc.contains("answer")) {
            return {doc.at("question").get<std::string>(),
                    doc.at("answer").get<std::string>()};
        }
    } catch (const nlohmann::json::exception&) {
        // not JSON
    }
    std::optional<std::string> question, answer;
    std::size_t start = 0;
    while (start <= reply.size()) {
        std::size_t end = reply.find('\n', start);
        std::string_view line(reply.data() + start,
                              (end == std::string::npos ? reply.size() : end) - start);
        if (!question) question = line_value(line, "question:");
        else if (!answer) answer = line_value(line, "answer:");
        if (end == std::string::npos) break;
        start = end + 1;
    }
    if (!question || !answer || question->empty() || answer->empty())
        throw UnparseableDecomposition("reply lacks question/answer fields: " + reply);
    return {*question, *answer};
}

}  // namespace

ConversionOutcome convert_statements(const std::vector<StatementRecord>& statements,
                                     ModelGateway& gateway,
                                     const ConversionOptions& options) {
    ConversionOutcome outcome;
    outcome.input_count = static_cast<int>(statements.size());
    int converted = 0;
    for (std::size_t idx = 0; idx < statements.size(); ++idx) {
        const StatementRecord& record = statements[idx];
        if (!record.label) {
            ++outcome.dropped_false;
            continue;
        }
        const std::string key =
            "decompose:" + (record.id.empty() ? std::to_string(idx) : record.id);
        PromptBundle bundle;
        bundle.template_id = "decompose";
        bundle.user_text =
            expand_template(options.template_text, {{"statement", record.statement}});

        // Majority vote over n runs by normalized answer; first run reaching
        // the plurality wins ties.
        std::vector<DecomposedPair> runs;
        std::map<std::string, int> votes;
        for (int run = 0; run < std::max(1, options.n_runs); ++run) {
            ModelReply reply = gateway.complete(bundle, key);
            DecomposedPair pair = parse_decomposition(reply.text);
            ++votes[normalize_answer(pair.answer)];
            runs.push_back(std::move(pair));
        }
        int best = 0;
        for (const auto& [_, count] : votes) best = std::max(best, count);
        const DecomposedPair* chosen = nullptr;
        for (const DecomposedPair& pair : runs)
            if (votes[normalize_answer(pair.answer)] == best) {
                chosen = &pair;
                break;
            }

        ++converted;
        ConversionRecord out;
        out.id = record.id.empty() ? std::to_string(idx) : record.id;
        out.statement = record.statement;
        out.generated_question = chosen->question;
        out.generated_answer = chosen->answer;
        out.answer_in_statement = contains_normalized(
            normalize_answer(record.statement), normalize_answer(chosen->answer));
        if (out.answer_in_statement) {
            outcome.records.push_back(std::move(out));
        } else {
            ++outcome.excluded_answer_missing;
        }
    }
    outcome.retention_rate =
        converted == 0 ? 0.0
                       : static_cast<double>(outcome.records.size()) / converted;
    return outcome;
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

namespace {

struct Accumulator {
    long count = 0;
    double question_tokens = 0;
    double table_tokens = 0;
    double answer_tokens = 0;
    double pixel_area = 0;
    double cell_count = 0;

    void add(const QAInstance& inst, const SizeEstimate& est) {
        ++count;
        question_tokens += static_cast<double>(count_tokens(inst.question));
        table_tokens += static_cast<double>(est.token_count);
        answer_tokens +=
            static_cast<double>(count_tokens(inst.gold_answers.front()));
        pixel_area += est.pixel_area;
        cell_count += static_cast<double>(est.cell_count);
    }

    ordered_json to_json() const {
        ordered_json j;
        j["count"] = count;
        j["avg_question_tokens"] = question_tokens / count;
        j["avg_table_tokens"] = table_tokens / count;
        j["avg_answer_tokens"] = answer_tokens / count;
        j["avg_pixel_area"] = pixel_area / count;
        j["avg_cell_count"] = cell_count / count;
        return j;
    }
};

}  // namespace

ordered_json summarize_corpus(const std::vector<QAInstance>& corpus,
                              const EstimateOptions& options) {
    if (corpus.empty()) throw MalformedInput("cannot summarize an empty corpus");
    Accumulator overall;
    std::map<std::string, Accumulator> per_dataset;
    std::map<std::string, Accumulator> per_setting;
    for (const QAInstance& inst : corpus) {
        const SizeEstimate est = estimate_instance(inst, options);
        overall.add(inst, est);
        per_dataset[inst.dataset.empty() ? "(unknown)" : inst.dataset].add(inst, est);
        if (inst.question_type && inst.size_class && *inst.size_class != SizeClass::Excluded) {
            const std::string setting =
                std::string(*inst.size_class == SizeClass::Big ? "big" : "small") + "_" +
                to_string(*inst.question_type);
            per_setting[setting].add(inst, est);
        }
    }
    ordered_json j;
    j["overall"] = overall.to_json();
    ordered_json datasets;
    for (const auto& [name, acc] : per_dataset) datasets[name] = acc.to_json();
    j["per_dataset"] = std::move(datasets);
    if (!per_setting.empty()) {
        ordered_json settings;
        for (const auto& [name, acc] : per_setting) settings[name] = acc.to_json();
        j["per_setting"] = std::move(settings);
    }
    return j;
}

}  // namespace fres
