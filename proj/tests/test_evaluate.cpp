#include <doctest.h>

#include <random>

#include "fres/evaluate.hpp"
#include "support.hpp"

using namespace fres;

namespace {

MaskedResults uniform_results(int correct, int total) {
    MaskedResults results;
    for (EvalSetting setting : {EvalSetting::BigReasoning, EvalSetting::BigRetrieval,
                                EvalSetting::SmallReasoning, EvalSetting::SmallRetrieval})
        for (Masking masking : {Masking::NoQuestion, Masking::NoTable})
            results[{setting, masking}] = {correct, total};
    return results;
}

std::vector<QAInstance> simple_instances(int count) {
    std::vector<QAInstance> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(testsupport::make_instance(
            "inst-" + std::to_string(i / 10) + std::to_string(i % 10), "DS", "q?",
            Table::from_strings({{"a"}}, {{"v" + std::to_string(i)}}),
            {"answer" + std::to_string(i)}));
    }
    return out;
}

}  // namespace

TEST_CASE("contamination_admit applies the inclusive 20% rule per cell") {
    CHECK(contamination_admit(uniform_results(0, 400)));
    CHECK(contamination_admit(uniform_results(80, 400)));  // exactly 20% passes

    MaskedResults one_hot = uniform_results(80, 400);
    one_hot[{EvalSetting::SmallReasoning, Masking::NoTable}] = {81, 400};
    CHECK_FALSE(contamination_admit(one_hot));

    MaskedResults reject = uniform_results(0, 400);
    reject[{EvalSetting::BigRetrieval, Masking::NoQuestion}] = {85, 400};
    CHECK_FALSE(contamination_admit(reject));

    MaskedResults incomplete = uniform_results(0, 400);
    incomplete.erase({EvalSetting::BigReasoning, Masking::NoTable});
    CHECK_THROWS_AS(contamination_admit(incomplete), IncompleteResults);
}

TEST_CASE("exclude_contaminated drops exactly the masked-solved instances") {
    auto instances = simple_instances(10);

    SUBCASE("model solves 2 of 10 under table masking") {
        MaskedPredictions masked;
        masked.model = "m1";
        masked.masking = Masking::NoTable;
        masked.prediction_by_id["inst-03"] = "Answer3";  // normalizes equal
        masked.prediction_by_id["inst-07"] = "answer7";
        masked.prediction_by_id["inst-05"] = "wrong";
        ExclusionOutcome outcome = exclude_contaminated(instances, {masked});
        CHECK(outcome.retained.size() == 8);
        CHECK(outcome.removed_ids == std::vector<std::string>{"inst-03", "inst-07"});
        CHECK(outcome.retention_rate == doctest::Approx(0.8));
    }
    SUBCASE("no correct masked predictions keeps everything") {
        MaskedPredictions masked;
        masked.model = "m1";
        masked.masking = Masking::NoQuestion;
        for (const auto& inst : instances) masked.prediction_by_id[inst.id] = "nope";
        ExclusionOutcome outcome = exclude_contaminated(instances, {masked});
        CHECK(outcome.retained.size() == 10);
        CHECK(outcome.retention_rate == doctest::Approx(1.0));
    }
    SUBCASE("any model under either masking removes; unsolved instances stay") {
        MaskedPredictions m1{"m1", Masking::NoQuestion, {{"inst-01", "answer1"}}};
        MaskedPredictions m2{"m2", Masking::NoTable, {{"inst-02", "answer2"}}};
        ExclusionOutcome outcome = exclude_contaminated(instances, {m1, m2});
        CHECK(outcome.retained.size() == 8);
        for (const auto& inst : outcome.retained) {
            CHECK(inst.id != "inst-01");
            CHECK(inst.id != "inst-02");
        }
    }
}

TEST_CASE("quantile bins split counts evenly") {
    std::vector<BinInput> inputs;
    for (int i = 0; i < 12; ++i) {
        BinInput input;
        input.id = "i" + std::to_string(i);
        input.size_measure = 10.0 * (i + 1);
        input.correct_by_approach["a"] = true;
        inputs.push_back(std::move(input));
    }
    auto curves = bin_by_size(inputs, 6, BinMode::Quantile);
    REQUIRE(curves.size() == 6);
    int total = 0;
    for (const auto& curve : curves) {
        CHECK(curve.count == 2);
        total += curve.count;
        CHECK(curve.em_by_approach.at("a") == doctest::Approx(100.0));
    }
    CHECK(total == 12);
}

TEST_CASE("hand-computed 18-instance bin curve") {
    // measures 10..180; approach A correct on the first 9, approach B on
    // every third instance (indices 0,3,6,9,12,15)
    std::vector<BinInput> inputs;
    for (int i = 0; i < 18; ++i) {
        BinInput input;
        input.id = (i < 10 ? "i0" : "i") + std::to_string(i);
        input.size_measure = 10.0 * (i + 1);
        input.correct_by_approach["A"] = i < 9;
        input.correct_by_approach["B"] = (i % 3) == 0;
        inputs.push_back(std::move(input));
    }
    auto curves = bin_by_size(inputs, 6, BinMode::Quantile);
    REQUIRE(curves.size() == 6);
    // bins of 3: A -> 100,100,100,0,0,0 ; B -> 1/3 each bin
    for (int b = 0; b < 6; ++b) {
        CAPTURE(b);
        CHECK(curves[b].count == 3);
        CHECK(curves[b].em_by_approach.at("A") == doctest::Approx(b < 3 ? 100.0 : 0.0));
        CHECK(curves[b].em_by_approach.at("B") == doctest::Approx(100.0 / 3));
    }
    CHECK(curves[0].lo == doctest::Approx(10.0));
    CHECK(curves[0].hi == doctest::Approx(30.0));
    CHECK(curves[5].hi == doctest::Approx(180.0));
}

TEST_CASE("equal width bins cover the range and may be empty") {
    std::vector<BinInput> inputs;
    for (double m : {0.0, 1.0, 2.0, 99.0, 100.0}) {
        BinInput input;
        input.id = "m" + std::to_string(static_cast<int>(m));
        input.size_measure = m;
        input.correct_by_approach["a"] = true;
        inputs.push_back(std::move(input));
    }
    auto curves = bin_by_size(inputs, 4, BinMode::EqualWidth);
    REQUIRE(curves.size() == 4);
    CHECK(curves[0].count == 3);  // 0,1,2 in [0,25)
    CHECK(curves[1].count == 0);
    CHECK(curves[2].count == 0);
    CHECK(curves[3].count == 2);  // 99,100
    int total = 0;
    for (const auto& c : curves) total += c.count;
    CHECK(total == 5);
}

TEST_CASE("efficiency report computes avoidance and savings") {
    SUBCASE("8 of 10 avoid the image") {
        std::vector<EfficiencyInput> inputs;
        for (int i = 0; i < 10; ++i) {
            EfficiencyInput input;
            input.id = "i" + std::to_string(i);
            input.fres_uses_image = i >= 8;
            input.fres_input_tokens = 100 + (input.fres_uses_image ? 1024 : 0);
            input.both_input_tokens = 100 + 1024;
            inputs.push_back(std::move(input));
        }
        EfficiencyReport report = efficiency_report(inputs);
        CHECK(report.image_avoidance_rate == doctest::Approx(0.8));
        CHECK(report.total_tokens_fres == 10 * 100 + 2 * 1024);
        CHECK(report.total_tokens_both == 10 * (100 + 1024));
        CHECK(report.token_savings > 0.0);
        CHECK(report.total_tokens_both - report.total_tokens_fres == 8 * 1024);
    }
    SUBCASE("no avoidance when every decision carries the image") {
        std::vector<EfficiencyInput> inputs(4);
        for (auto& input : inputs) {
            input.fres_uses_image = true;
            input.fres_input_tokens = 200;
            input.both_input_tokens = 200;
        }
        EfficiencyReport report = efficiency_report(inputs);
        CHECK(report.image_avoidance_rate == doctest::Approx(0.0));
        CHECK(report.token_savings == doctest::Approx(0.0));
    }
}

TEST_CASE("error taxonomy follows the precedence order") {
    const auto make_case = [](bool text, bool image, bool both, QuestionType predicted,
                              QuestionType gold) {
        ErrorCase c;
        c.id = "e";
        c.correct_by_representation = {{"text", text}, {"image", image}, {"both", both}};
        c.predicted_type = predicted;
        c.gold_type = gold;
        return c;
    };
    const auto retrieval = QuestionType::Retrieval;
    const auto reasoning = QuestionType::Reasoning;

    CHECK(categorize_error(make_case(false, false, false, retrieval, retrieval)) ==
          ErrorCategory::LimitedModelCapability);
    CHECK(categorize_error(make_case(false, true, false, retrieval, retrieval)) ==
          ErrorCategory::ExceptionalCase);
    // image correct wins even when text is also correct
    CHECK(categorize_error(make_case(true, true, true, retrieval, retrieval)) ==
          ErrorCategory::ExceptionalCase);
    CHECK(categorize_error(make_case(true, false, false, reasoning, reasoning)) ==
          ErrorCategory::ThresholdLimitation);
    CHECK(categorize_error(make_case(true, false, false, retrieval, reasoning)) ==
          ErrorCategory::ClassifierFailure);
    CHECK(categorize_error(make_case(false, false, true, reasoning, retrieval)) ==
          ErrorCategory::ClassifierFailure);

    ErrorCase incomplete;
    incomplete.id = "x";
    incomplete.correct_by_representation = {{"text", true}};
    CHECK_THROWS_AS(categorize_error(incomplete), IncompleteRepredictions);

    std::vector<ErrorCase> cases = {
        make_case(false, false, false, retrieval, retrieval),
        make_case(false, true, false, retrieval, retrieval),
        make_case(true, false, false, reasoning, reasoning),
        make_case(true, false, false, retrieval, reasoning),
    };
    auto counts = categorize_errors(cases);
    int total = 0;
    for (const auto& [_, count] : counts) total += count;
    CHECK(total == 4);
    CHECK(counts.at(ErrorCategory::LimitedModelCapability) == 1);
    CHECK(counts.at(ErrorCategory::ExceptionalCase) == 1);
    CHECK(counts.at(ErrorCategory::ThresholdLimitation) == 1);
    CHECK(counts.at(ErrorCategory::ClassifierFailure) == 1);
}

TEST_CASE("evaluate_predictions assembles EM, settings and significance") {
    std::vector<QAInstance> corpus;
    for (int i = 0; i < 8; ++i) {
        QAInstance inst = testsupport::make_instance(
            "q" + std::to_string(i), "DS", "question",
            Table::from_strings({{"a"}}, {{"v"}}), {std::to_string(i)});
        inst.size_class = i < 4 ? SizeClass::Small : SizeClass::Big;
        inst.question_type = (i % 2) ? QuestionType::Reasoning : QuestionType::Retrieval;
        corpus.push_back(std::move(inst));
    }

    std::vector<PredictionRecord> predictions;
    for (int i = 0; i < 8; ++i) {
        PredictionRecord good{
            "q" + std::to_string(i), "good", std::to_string(i), 10, false};
        predictions.push_back(good);
        PredictionRecord half{"q" + std::to_string(i), "half",
                              i < 4 ? std::to_string(i) : "wrong", 20, false};
        predictions.push_back(half);
    }

    EvalReport report = evaluate_predictions(corpus, predictions);
    CHECK(report.corpus_size == 8);
    CHECK(report.overall_em.at("good") == doctest::Approx(100.0));
    CHECK(report.overall_em.at("half") == doctest::Approx(50.0));

    // per-setting EMs aggregate to overall, weighted by setting sizes
    for (const auto& approach : report.approaches) {
        double weighted = 0;
        int total = 0;
        for (const auto& [setting, em] : report.setting_em) {
            weighted += em.at(approach) * report.setting_counts.at(setting);
            total += report.setting_counts.at(setting);
        }
        CHECK(total == 8);
        CHECK(weighted / total == doctest::Approx(report.overall_em.at(approach)));
    }

    REQUIRE(report.significance.size() == 1);
    CHECK(report.significance[0].approach_pair.first == "good");
    CHECK(report.significance[0].n_effective == 4);

    SUBCASE("duplicate and unknown predictions are rejected") {
        auto bad = predictions;
        bad.push_back(predictions.front());
        CHECK_THROWS_AS(evaluate_predictions(corpus, bad), MalformedInput);
        PredictionRecord unknown{"nope", "good", "1", 0, false};
        CHECK_THROWS_AS(evaluate_predictions(corpus, {unknown}), MalformedInput);
    }
}
