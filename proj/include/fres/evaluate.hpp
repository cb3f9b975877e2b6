#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fres/corpus.hpp"
#include "fres/normalize.hpp"

namespace fres {

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test
// ---------------------------------------------------------------------------

enum class WilcoxonMethod { Exact, NormalApprox };

struct SignificanceResult {
    std::pair<std::string, std::string> approach_pair;
    int n_effective = 0;  // pairs remaining after zero differences drop
    double w_statistic = 0;
    double p_value = 1.0;  // two-sided, in (0, 1]
    WilcoxonMethod method = WilcoxonMethod::Exact;
};

struct WilcoxonOptions {
    // Exact distribution (DP over rank sums) up to this many nonzero
    // differences; the tie- and continuity-corrected normal approximation
    // beyond it.
    int exact_cutoff = 25;
};

// Two-sided test on paired scores. Zero differences are dropped; ties in
// |difference| receive average ranks; W = min(W+, W-). Throws
// AllZeroDifferences when nothing remains.
SignificanceResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                        const WilcoxonOptions& options = {});

// ---------------------------------------------------------------------------
// Contamination control
// ---------------------------------------------------------------------------

enum class Masking { NoQuestion, NoTable };
enum class EvalSetting { BigReasoning, BigRetrieval, SmallReasoning, SmallRetrieval };

const char* to_string(Masking m);
const char* to_string(EvalSetting s);

struct MaskedCell {
    int correct = 0;
    int total = 0;
};

// Accuracy of one model pair in each (setting, masking) cell.
using MaskedResults = std::map<std::pair<EvalSetting, Masking>, MaskedCell>;

// Admit iff accuracy <= cutoff in every one of the eight cells (inclusive:
// 80 of 400 passes, 81 fails). Throws IncompleteResults when a cell is
// missing. Integer arithmetic; cutoff is a rational numerator/denominator.
bool contamination_admit(const MaskedResults& results, int cutoff_numerator = 1,
                         int cutoff_denominator = 5);

struct MaskedPredictions {
    std::string model;
    Masking masking = Masking::NoQuestion;
    std::map<std::string, std::string> prediction_by_id;
};

struct ExclusionOutcome {
    std::vector<QAInstance> retained;
    std::vector<std::string> removed_ids;
    double retention_rate = 1.0;
};

// Drops an instance iff any model answered it correctly under either
// masking. Instances with no masked prediction on file are kept.
ExclusionOutcome exclude_contaminated(const std::vector<QAInstance>& instances,
                                      const std::vector<MaskedPredictions>& masked);

// ---------------------------------------------------------------------------
// Size-binned robustness curves
// ---------------------------------------------------------------------------

enum class BinMode { Quantile, EqualWidth };

struct BinInput {
    std::string id;
    double size_measure = 0;
    std::map<std::string, bool> correct_by_approach;
};

struct BinCurve {
    double lo = 0;  // smallest measure in the bin (quantile) or edge (equal width)
    double hi = 0;
    int count = 0;
    std::map<std::string, double> em_by_approach;  // percent over bin members
};

std::vector<BinCurve> bin_by_size(std::vector<BinInput> inputs, int n_bins = 6,
                                  BinMode mode = BinMode::Quantile);

// ---------------------------------------------------------------------------
// Efficiency accounting
// ---------------------------------------------------------------------------

struct EfficiencyInput {
    std::string id;
    bool fres_uses_image = false;
    long fres_input_tokens = 0;
    long both_input_tokens = 0;
};

struct EfficiencyReport {
    double image_avoidance_rate = 0;  // fraction of decisions without an image
    long total_tokens_fres = 0;
    long total_tokens_both = 0;
    double token_savings = 0;  // 1 - fres/both
};

EfficiencyReport efficiency_report(const std::vector<EfficiencyInput>& inputs);

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

enum class ErrorCategory {
    LimitedModelCapability,
    ExceptionalCase,
    ThresholdLimitation,
    ClassifierFailure,
};

const char* to_string(ErrorCategory c);

struct ErrorCase {
    std::string id;
    // Correctness when re-predicting the failed instance under each
    // representation: keys "text", "image", "both" must all be present.
    std::map<std::string, bool> correct_by_representation;
    QuestionType predicted_type = QuestionType::Retrieval;
    QuestionType gold_type = QuestionType::Retrieval;
};

// Precedence: everything wrong -> LimitedModelCapability; image-only
// correct -> ExceptionalCase; else some representation correct and the
// question type was right -> ThresholdLimitation, wrong -> ClassifierFailure.
ErrorCategory categorize_error(const ErrorCase& error_case);
std::map<ErrorCategory, int> categorize_errors(const std::vector<ErrorCase>& cases);

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

struct PredictionRecord {
    std::string id;
    std::string approach;
    std::string prediction;
    std::optional<long> input_tokens;
    bool used_image = false;
};

struct EvalReportOptions {
    int n_bins = 6;
    BinMode bin_mode = BinMode::Quantile;
    // Measure used for binning: "pixels" or "tokens".
    std::string bin_measure = "pixels";
    WilcoxonOptions wilcoxon = {};
    // Approach name treated as the both-representations baseline for token
    // savings.
    std::string both_approach = "both";
    std::string fres_approach = "fres";
};

struct EvalReport {
    int corpus_size = 0;
    std::vector<std::string> approaches;
    std::map<std::string, double> overall_em;                          // percent
    std::map<std::string, std::map<std::string, double>> setting_em;   // setting -> approach -> EM
    std::map<std::string, int> setting_counts;
    std::vector<BinCurve> bin_curves;
    std::vector<SignificanceResult> significance;
    std::optional<EfficiencyReport> efficiency;
    std::map<std::string, double> error_breakdown;  // category -> percent of failures
};

// Scores predictions against the corpus and assembles the full report.
// Instances are scored in id order; significance covers every approach pair
// with at least one discordant instance.
EvalReport evaluate_predictions(const std::vector<QAInstance>& corpus,
                                const std::vector<PredictionRecord>& predictions,
                                const std::vector<BinInput>& bin_inputs = {},
                                const EvalReportOptions& options = {});

nlohmann::ordered_json eval_report_to_json(const EvalReport& report);
std::string bin_curves_to_csv(const std::vector<BinCurve>& curves);

}  // namespace fres
