#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fres/corpus.hpp"
#include "fres/gateway.hpp"
#include "fres/table.hpp"

namespace fres {

enum class ClassifierStage { AnswerRule, ComparativeRule, LlmFallback };
enum class ClassifyMode { Construction, Inference };

const char* to_string(ClassifierStage s);

struct QuestionTypeResult {
    QuestionType label = QuestionType::Retrieval;
    ClassifierStage stage = ClassifierStage::LlmFallback;
    std::optional<std::string> confidence_note;
};

// Comparative-term detection data: a word list plus an exception list for
// the -er/-est suffix heuristic. Users extend it through a plain text file
// with [terms] and [suffix_exceptions] sections ('#' comments).
class ComparativeLexicon {
public:
    static const ComparativeLexicon& defaults();
    static ComparativeLexicon from_file(const std::string& path);
    ComparativeLexicon(std::set<std::string> terms, std::set<std::string> suffix_exceptions)
        : terms_(std::move(terms)), suffix_exceptions_(std::move(suffix_exceptions)) {}

    bool matches_token(std::string_view lowercase_token) const;

private:
    std::set<std::string> terms_;
    std::set<std::string> suffix_exceptions_;
};

// True iff any word of the question hits the lexicon or carries an -er/-est
// suffix not on the exception list.
bool contains_comparative(std::string_view question,
                          const ComparativeLexicon& lexicon = ComparativeLexicon::defaults());

struct ClassifierOptions {
    ComparativeLexicon lexicon = ComparativeLexicon::defaults();
    std::string llm_template = PromptTemplates::defaults().classify;
    TableLayout layout = TableLayout::Markdown;
    SerializeOptions serialize_options = {};
    // Stop the cascade after the rules; unresolved questions default to
    // retrieval instead of consulting the gateway.
    bool lexicon_only = false;
};

// The question-complexity cascade: answer containment (construction mode
// only, fires reasoning when no gold answer appears in any cell), then
// comparative terms, then the LLM. The containment check shares
// normalize_answer with scoring.
class QuestionClassifier {
public:
    QuestionClassifier() : QuestionClassifier(ClassifierOptions{}) {}
    explicit QuestionClassifier(ClassifierOptions options);

    // Construction mode requires gold_answers and may consult them;
    // inference mode never reads them. request_key threads through to
    // scripted gateways.
    QuestionTypeResult classify(const std::string& question, const Table& table,
                                const std::vector<std::string>* gold_answers,
                                ModelGateway* gateway, ClassifyMode mode,
                                std::string_view request_key = {}) const;

    const ClassifierOptions& options() const { return options_; }

private:
    ClassifierOptions options_;
};

}  // namespace fres
