#include "fres/router.hpp"

#include "fres/classify.hpp"
#include "fres/gateway.hpp"

namespace fres {

std::vector<std::string> RepresentationSet::names() const {
    std::vector<std::string> out;
    if (text) out.push_back("text");
    if (image) out.push_back("image");
    return out;
}

RoutingDecision route(SizeClass fres_size_class, QuestionType question_type) {
    if (fres_size_class == SizeClass::Excluded)
        throw ConfigError("routing requires a Small/Big size class, not Excluded");

    RoutingDecision decision;
    decision.size_class = fres_size_class;
    decision.question_type = question_type;

    if (fres_size_class == SizeClass::Big) {
        decision.representations = RepresentationSet::text_only();
        decision.rationale = question_type == QuestionType::Retrieval
                                 ? "fres/big-retrieval:text"
                                 : "fres/big-reasoning:text";
    } else if (question_type == QuestionType::Retrieval) {
        decision.representations = RepresentationSet::text_only();
        decision.rationale = "fres/small-retrieval:text";
    } else {
        decision.representations = RepresentationSet::both();
        decision.rationale = "fres/small-reasoning:text+image";
    }
    return decision;
}

RoutingDecision route_instance(const QAInstance& instance,
                               const QuestionClassifier& classifier,
                               ModelGateway* gateway,
                               const RouteInstanceOptions& options) {
    const SizeEstimate estimate = estimate_instance(instance, options.estimate);

    QuestionType question_type;
    std::string fallback_note;
    try {
        QuestionTypeResult result =
            classifier.classify(instance.question, instance.table, nullptr, gateway,
                                ClassifyMode::Inference, "classify:" + instance.id);
        question_type = result.label;
    } catch (const UnparseableLlmReply&) {
        // An unusable verdict falls back to the label that keeps both
        // representations reachable; transport errors propagate instead.
        question_type = QuestionType::Reasoning;
        fallback_note = "classifier-unparseable:fallback-reasoning";
    }

    RoutingDecision decision = route(estimate.classification_fres, question_type);
    if (!fallback_note.empty()) decision.rationale += ";" + fallback_note;

    if (decision.representations.image && !instance.image_ref &&
        !options.renderer_hook_available) {
        decision.representations = RepresentationSet::text_only();
        decision.rationale += ";missing-image:degraded-to-text";
    }
    return decision;
}

nlohmann::ordered_json routing_decision_to_json(const RoutingDecision& decision) {
    nlohmann::ordered_json j;
    j["representations"] = decision.representations.names();
    if (decision.size_class) j["size_class"] = to_string(*decision.size_class);
    if (decision.question_type) j["question_type"] = to_string(*decision.question_type);
    j["rationale"] = decision.rationale;
    return j;
}

RoutingDecision routing_decision_from_json(const nlohmann::ordered_json& doc) {
    RoutingDecision decision;
    for (const auto& name : doc.at("representations")) {
        const std::string rep = name.get<std::string>();
        if (rep == "text") decision.representations.text = true;
        else if (rep == "image") decision.representations.image = true;
        else throw MalformedInput("unknown representation: " + rep);
    }
    if (doc.contains("size_class") && !doc.at("size_class").is_null())
        decision.size_class = size_class_from_string(doc.at("size_class").get<std::string>());
    if (doc.contains("question_type") && !doc.at("question_type").is_null())
        decision.question_type =
            question_type_from_string(doc.at("question_type").get<std::string>());
    decision.rationale = doc.value("rationale", std::string{});
    return decision;
}

}  // namespace fres
