#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fres/corpus.hpp"
#include "fres/size.hpp"

namespace fres {

class ModelGateway;
class QuestionClassifier;

enum class Representation { Text, Image };

struct RepresentationSet {
    bool text = false;
    bool image = false;

    bool contains(Representation r) const {
        return r == Representation::Text ? text : image;
    }
    bool operator==(const RepresentationSet&) const = default;

    static RepresentationSet text_only() { return {true, false}; }
    static RepresentationSet image_only() { return {false, true}; }
    static RepresentationSet both() { return {true, true}; }

    std::vector<std::string> names() const;
};

struct RoutingDecision {
    RepresentationSet representations;
    // Cached sub-results; always set on FRES routes, absent for fixed
    // strategies.
    std::optional<SizeClass> size_class;
    std::optional<QuestionType> question_type;
    std::string rationale;  // rule id, ';'-joined with degradation notes
};

// The selection rule over (size, complexity): big tables go as text, small
// ones as text for retrieval questions and as text plus image otherwise.
// Total over the 2x2 domain; Excluded is not a valid routing size.
RoutingDecision route(SizeClass fres_size_class, QuestionType question_type);

struct RouteInstanceOptions {
    EstimateOptions estimate = {};
    // When a rasterizer hook is configured an image can be produced on
    // demand, so a missing image_ref does not force degradation.
    bool renderer_hook_available = false;
};

// End-to-end decision for one instance: size rule, question classification
// (inference mode), then route. An unusable classifier verdict falls back to
// reasoning; gateway transport errors propagate. When the decision wants an
// image that cannot be resolved the route degrades to text and says so in
// the rationale.
RoutingDecision route_instance(const QAInstance& instance,
                               const QuestionClassifier& classifier,
                               ModelGateway* gateway,
                               const RouteInstanceOptions& options = {});

nlohmann::ordered_json routing_decision_to_json(const RoutingDecision& decision);
RoutingDecision routing_decision_from_json(const nlohmann::ordered_json& doc);

}  // namespace fres
