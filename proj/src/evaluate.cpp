#include "fres/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fres {

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank
// ---------------------------------------------------------------------------

SignificanceResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                        const WilcoxonOptions& options) {
    struct Item {
        double abs_diff;
        bool positive;
    };
    std::vector<Item> items;
    for (const auto& [a, b] : pairs) {
        double d = a - b;
        if (d != 0.0) items.push_back({std::fabs(d), d > 0});
    }
    if (items.empty())
        throw AllZeroDifferences("all paired differences are zero");

    std::sort(items.begin(), items.end(),
              [](const Item& x, const Item& y) { return x.abs_diff < y.abs_diff; });
    const int n = static_cast<int>(items.size());

    // Doubled ranks keep average ranks of tie groups integral: a group
    // occupying 1-based positions i+1..j has average rank (i+j+1)/2.
    std::vector<long long> doubled_rank(n);
    double tie_correction = 0;  // sum of t^3 - t over tie groups
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && items[j].abs_diff == items[i].abs_diff) ++j;
        const long long dr = i + j + 1;
        for (int k = i; k < j; ++k) doubled_rank[k] = dr;
        const double t = j - i;
        tie_correction += t * t * t - t;
        i = j;
    }

    const long long total2 = static_cast<long long>(n) * (n + 1);
    long long w_plus2 = 0;
    for (int i = 0; i < n; ++i)
        if (items[i].positive) w_plus2 += doubled_rank[i];
    const long long w_minus2 = total2 - w_plus2;
    const long long w2 = std::min(w_plus2, w_minus2);

    SignificanceResult result;
    result.n_effective = n;
    result.w_statistic = static_cast<double>(w2) / 2.0;

    if (n <= options.exact_cutoff) {
        // Count sign assignments by doubled rank sum, then fold the symmetric
        // tail: p = #{assignments with min(W+, W-) <= observed} / 2^n.
        std::vector<long long> counts(static_cast<std::size_t>(total2) + 1, 0);
        counts[0] = 1;
        for (int i = 0; i < n; ++i) {
            const long long r = doubled_rank[i];
            for (long long s = total2; s >= r; --s) counts[s] += counts[s - r];
        }
        long long cumulative = 0;
        for (long long s = 0; s <= w2; ++s) cumulative += counts[s];
        const long long assignments = 1LL << n;
        const long long extreme = std::min(assignments, 2 * cumulative);
        result.p_value = static_cast<double>(extreme) / static_cast<double>(assignments);
        result.method = WilcoxonMethod::Exact;
    } else {
        const double mean = static_cast<double>(total2) / 4.0;
        const double variance =
            static_cast<double>(n) * (n + 1) * (2 * n + 1) / 24.0 - tie_correction / 48.0;
        const double w = static_cast<double>(w2) / 2.0;
        const double z = (w - mean + 0.5) / std::sqrt(variance);
        double p = std::erfc(-z / std::sqrt(2.0));  // 2 * Phi(z)
        p = std::min(1.0, std::max(p, 1e-300));
        result.p_value = p;
        result.method = WilcoxonMethod::NormalApprox;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Contamination control
// ---------------------------------------------------------------------------

const char* to_string(Masking m) {
    return m == Masking::NoQuestion ? "no_question" : "no_table";
}

const char* to_string(EvalSetting s) {
    switch (s) {
        case EvalSetting::BigReasoning: return "big_reasoning";
        case EvalSetting::BigRetrieval: return "big_retrieval";
        case EvalSetting::SmallReasoning: return "small_reasoning";
        case EvalSetting::SmallRetrieval: return "small_retrieval";
    }
    return "big_reasoning";
}

bool contamination_admit(const MaskedResults& results, int cutoff_numerator,
                         int cutoff_denominator) {
    static constexpr EvalSetting kSettings[] = {
        EvalSetting::BigReasoning, EvalSetting::BigRetrieval,
        EvalSetting::SmallReasoning, EvalSetting::SmallRetrieval};
    static constexpr Masking kMaskings[] = {Masking::NoQuestion, Masking::NoTable};
    for (EvalSetting setting : kSettings) {
        for (Masking masking : kMaskings) {
            auto it = results.find({setting, masking});
            if (it == results.end())
                throw IncompleteResults(std::string("missing masked cell: ") +
                                        to_string(setting) + "/" + to_string(masking));
            const MaskedCell& cell = it->second;
            // correct/total <= num/den, in integers
            if (static_cast<long long>(cell.correct) * cutoff_denominator >
                static_cast<long long>(cell.total) * cutoff_numerator)
                return false;
        }
    }
    return true;
}

ExclusionOutcome exclude_contaminated(const std::vector<QAInstance>& instances,
                                      const std::vector<MaskedPredictions>& masked) {
    std::set<std::string> removed;
    std::map<std::string, const QAInstance*> by_id;
    for (const QAInstance& inst : instances) by_id[inst.id] = &inst;

    for (const MaskedPredictions& set : masked) {
        for (const auto& [id, prediction] : set.prediction_by_id) {
            auto it = by_id.find(id);
            if (it == by_id.end()) continue;
            if (exact_match(prediction, it->second->gold_answers)) removed.insert(id);
        }
    }

    ExclusionOutcome outcome;
    for (const QAInstance& inst : instances) {
        if (removed.count(inst.id)) {
            outcome.removed_ids.push_back(inst.id);
        } else {
            outcome.retained.push_back(inst);
        }
    }
    outcome.retention_rate =
        instances.empty() ? 1.0
                          : static_cast<double>(outcome.retained.size()) /
                                static_cast<double>(instances.size());
    return outcome;
}

// ---------------------------------------------------------------------------
// Size bins
// ---------------------------------------------------------------------------

namespace {

BinCurve summarize_bin(const std::vector<const BinInput*>& members, double lo, double hi) {
    BinCurve curve;
    curve.lo = lo;
    curve.hi = hi;
    curve.count = static_cast<int>(members.size());
    std::map<std::string, std::pair<int, int>> tally;  // approach -> (correct, total)
    for (const BinInput* input : members) {
        for (const auto& [approach, correct] : input->correct_by_approach) {
            auto& [c, t] = tally[approach];
            if (correct) ++c;
            ++t;
        }
    }
    for (const auto& [approach, ct] : tally)
        curve.em_by_approach[approach] =
            ct.second == 0 ? 0.0 : 100.0 * ct.first / ct.second;
    return curve;
}

}  // namespace

std::vector<BinCurve> bin_by_size(std::vector<BinInput> inputs, int n_bins, BinMode mode) {
    if (n_bins < 1) throw ConfigError("n_bins must be >= 1");
    std::vector<BinCurve> curves;
    if (inputs.empty()) return curves;

    std::sort(inputs.begin(), inputs.end(), [](const BinInput& a, const BinInput& b) {
        return a.size_measure != b.size_measure ? a.size_measure < b.size_measure
                                                : a.id < b.id;
    });

    if (mode == BinMode::Quantile) {
        const int total = static_cast<int>(inputs.size());
        const int base = total / n_bins;
        const int remainder = total % n_bins;
        int start = 0;
        for (int b = 0; b < n_bins && start < total; ++b) {
            const int size = base + (b < remainder ? 1 : 0);
            if (size == 0) continue;
            std::vector<const BinInput*> members;
            for (int i = start; i < start + size; ++i) members.push_back(&inputs[i]);
            curves.push_back(summarize_bin(members, inputs[start].size_measure,
                                           inputs[start + size - 1].size_measure));
            start += size;
        }
    } else {
        const double lo = inputs.front().size_measure;
        const double hi = inputs.back().size_measure;
        const double width = (hi - lo) / n_bins;
        std::vector<std::vector<const BinInput*>> buckets(n_bins);
        for (const BinInput& input : inputs) {
            int idx = width > 0
                          ? static_cast<int>((input.size_measure - lo) / width)
                          : 0;
            idx = std::clamp(idx, 0, n_bins - 1);
            buckets[static_cast<std::size_t>(idx)].push_back(&input);
        }
        for (int b = 0; b < n_bins; ++b)
            curves.push_back(summarize_bin(buckets[static_cast<std::size_t>(b)],
                                           lo + b * width,
                                           b + 1 == n_bins ? hi : lo + (b + 1) * width));
    }
    return curves;
}

// ---------------------------------------------------------------------------
// Efficiency
// ---------------------------------------------------------------------------

EfficiencyReport efficiency_report(const std::vector<EfficiencyInput>& inputs) {
    EfficiencyReport report;
    if (inputs.empty()) return report;
    int avoided = 0;
    for (const EfficiencyInput& input : inputs) {
        if (!input.fres_uses_image) ++avoided;
        report.total_tokens_fres += input.fres_input_tokens;
        report.total_tokens_both += input.both_input_tokens;
    }
    report.image_avoidance_rate = static_cast<double>(avoided) / inputs.size();
    if (report.total_tokens_both > 0)
        report.token_savings = 1.0 - static_cast<double>(report.total_tokens_fres) /
                                         static_cast<double>(report.total_tokens_both);
    return report;
}

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::LimitedModelCapability: return "limited_model_capability";
        case ErrorCategory::ExceptionalCase: return "exceptional_case";
        case ErrorCategory::ThresholdLimitation: return "threshold_limitation";
        case ErrorCategory::ClassifierFailure: return "classifier_failure";
    }
    return "limited_model_capability";
}

ErrorCategory categorize_error(const ErrorCase& error_case) {
    const auto correct = [&](const char* key) {
        auto it = error_case.correct_by_representation.find(key);
        if (it == error_case.correct_by_representation.end())
            throw IncompleteRepredictions("instance " + error_case.id +
                                          " lacks a re-prediction under: " + key);
        return it->second;
    };
    const bool text = correct("text");
    const bool image = correct("image");
    const bool both = correct("both");

    if (!text && !image && !both) return ErrorCategory::LimitedModelCapability;
    if (image) return ErrorCategory::ExceptionalCase;
    return error_case.predicted_type == error_case.gold_type
               ? ErrorCategory::ThresholdLimitation
               : ErrorCategory::ClassifierFailure;
}

std::map<ErrorCategory, int> categorize_errors(const std::vector<ErrorCase>& cases) {
    std::map<ErrorCategory, int> counts;
    for (const ErrorCase& error_case : cases) ++counts[categorize_error(error_case)];
    return counts;
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

EvalReport evaluate_predictions(const std::vector<QAInstance>& corpus,
                                const std::vector<PredictionRecord>& predictions,
                                const std::vector<BinInput>& bin_inputs,
                                const EvalReportOptions& options) {
    std::vector<const QAInstance*> ordered;
    ordered.reserve(corpus.size());
    for (const QAInstance& inst : corpus) ordered.push_back(&inst);
    std::sort(ordered.begin(), ordered.end(),
              [](const QAInstance* a, const QAInstance* b) { return a->id < b->id; });

    std::map<std::string, const QAInstance*> by_id;
    for (const QAInstance& inst : corpus) by_id[inst.id] = &inst;

    // approach -> id -> record
    std::map<std::string, std::map<std::string, const PredictionRecord*>> grouped;
    for (const PredictionRecord& record : predictions) {
        if (!by_id.count(record.id))
            throw MalformedInput("prediction for unknown instance id: " + record.id);
        auto& slot = grouped[record.approach][record.id];
        if (slot != nullptr)
            throw MalformedInput("duplicate prediction for (" + record.id + ", " +
                                 record.approach + ")");
        slot = &record;
    }

    EvalReport report;
    report.corpus_size = static_cast<int>(corpus.size());
    for (const auto& [approach, _] : grouped) report.approaches.push_back(approach);

    // correctness[approach][id]; instances without a prediction score as wrong
    std::map<std::string, std::map<std::string, bool>> correctness;
    for (const auto& [approach, rows] : grouped) {
        int correct = 0;
        for (const QAInstance* inst : ordered) {
            auto it = rows.find(inst->id);
            const bool ok =
                it != rows.end() && exact_match(it->second->prediction, inst->gold_answers);
            correctness[approach][inst->id] = ok;
            if (ok) ++correct;
        }
        report.overall_em[approach] =
            corpus.empty() ? 0.0 : 100.0 * correct / static_cast<double>(corpus.size());
    }

    // Per-setting EM over instances annotated with both dimensions.
    std::map<std::string, std::vector<const QAInstance*>> by_setting;
    for (const QAInstance* inst : ordered) {
        if (!inst->question_type || !inst->size_class ||
            *inst->size_class == SizeClass::Excluded)
            continue;
        std::string setting =
            std::string(*inst->size_class == SizeClass::Big ? "big" : "small") + "_" +
            to_string(*inst->question_type);
        by_setting[setting].push_back(inst);
    }
    for (const auto& [setting, members] : by_setting) {
        report.setting_counts[setting] = static_cast<int>(members.size());
        for (const auto& [approach, _] : grouped) {
            int correct = 0;
            for (const QAInstance* inst : members)
                if (correctness[approach][inst->id]) ++correct;
            report.setting_em[setting][approach] =
                100.0 * correct / static_cast<double>(members.size());
        }
    }

    // Pairwise significance on per-instance binary scores, id order.
    for (auto a = grouped.begin(); a != grouped.end(); ++a) {
        for (auto b = std::next(a); b != grouped.end(); ++b) {
            std::vector<std::pair<double, double>> paired;
            paired.reserve(ordered.size());
            for (const QAInstance* inst : ordered)
                paired.emplace_back(correctness[a->first][inst->id] ? 1.0 : 0.0,
                                    correctness[b->first][inst->id] ? 1.0 : 0.0);
            try {
                SignificanceResult sig = wilcoxon_signed_rank(paired, options.wilcoxon);
                sig.approach_pair = {a->first, b->first};
                report.significance.push_back(sig);
            } catch (const AllZeroDifferences&) {
                // Identical outcome vectors carry no signal; omit the pair.
            }
        }
    }

    if (!bin_inputs.empty()) {
        // Callers may pass bare (id, measure) pairs; correctness fills in
        // from the scoring above.
        std::vector<BinInput> enriched = bin_inputs;
        for (BinInput& input : enriched) {
            if (!input.correct_by_approach.empty()) continue;
            for (const auto& [approach, scores] : correctness) {
                auto it = scores.find(input.id);
                if (it != scores.end()) input.correct_by_approach[approach] = it->second;
            }
        }
        report.bin_curves = bin_by_size(std::move(enriched), options.n_bins, options.bin_mode);
    }

    // Efficiency: avoidance over FRES decisions, token totals vs the
    // both-representations baseline where present.
    auto fres_it = grouped.find(options.fres_approach);
    if (fres_it != grouped.end()) {
        std::vector<EfficiencyInput> inputs;
        auto both_it = grouped.find(options.both_approach);
        for (const QAInstance* inst : ordered) {
            auto fit = fres_it->second.find(inst->id);
            if (fit == fres_it->second.end()) continue;
            EfficiencyInput input;
            input.id = inst->id;
            input.fres_uses_image = fit->second->used_image;
            input.fres_input_tokens = fit->second->input_tokens.value_or(0);
            if (both_it != grouped.end()) {
                auto bit = both_it->second.find(inst->id);
                if (bit != both_it->second.end())
                    input.both_input_tokens = bit->second->input_tokens.value_or(0);
            }
            inputs.push_back(std::move(input));
        }
        if (!inputs.empty()) report.efficiency = efficiency_report(inputs);
    }

    return report;
}

nlohmann::ordered_json eval_report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["corpus_size"] = report.corpus_size;
    j["approaches"] = report.approaches;
    j["overall_em"] = report.overall_em;
    if (!report.setting_em.empty()) {
        j["setting_em"] = report.setting_em;
        j["setting_counts"] = report.setting_counts;
    }
    if (!report.bin_curves.empty()) {
        nlohmann::ordered_json curves = nlohmann::ordered_json::array();
        for (const BinCurve& curve : report.bin_curves) {
            nlohmann::ordered_json c;
            c["lo"] = curve.lo;
            c["hi"] = curve.hi;
            c["count"] = curve.count;
            c["em"] = curve.em_by_approach;
            curves.push_back(std::move(c));
        }
        j["bin_curves"] = std::move(curves);
    }
    if (!report.significance.empty()) {
        nlohmann::ordered_json sigs = nlohmann::ordered_json::array();
        for (const SignificanceResult& sig : report.significance) {
            nlohmann::ordered_json s;
            s["a"] = sig.approach_pair.first;
            s["b"] = sig.approach_pair.second;
            s["n_effective"] = sig.n_effective;
            s["w"] = sig.w_statistic;
            s["p"] = sig.p_value;
            s["method"] = sig.method == WilcoxonMethod::Exact ? "exact" : "normal_approx";
            sigs.push_back(std::move(s));
        }
        j["significance"] = std::move(sigs);
    }
    if (report.efficiency) {
        nlohmann::ordered_json e;
        e["image_avoidance_rate"] = report.efficiency->image_avoidance_rate;
        e["total_tokens_fres"] = report.efficiency->total_tokens_fres;
        e["total_tokens_both"] = report.efficiency->total_tokens_both;
        e["token_savings"] = report.efficiency->token_savings;
        j["efficiency"] = std::move(e);
    }
    if (!report.error_breakdown.empty()) j["error_breakdown"] = report.error_breakdown;
    return j;
}

std::string bin_curves_to_csv(const std::vector<BinCurve>& curves) {
    std::set<std::string> approaches;
    for (const BinCurve& curve : curves)
        for (const auto& [approach, _] : curve.em_by_approach) approaches.insert(approach);
    std::ostringstream os;
    os << "lo,hi,count";
    for (const auto& approach : approaches) os << ",em_" << approach;
    os << '\n';
    for (const BinCurve& curve : curves) {
        os << curve.lo << ',' << curve.hi << ',' << curve.count;
        for (const auto& approach : approaches) {
            os << ',';
            auto it = curve.em_by_approach.find(approach);
            if (it != curve.em_by_approach.end()) os << it->second;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace fres
