#include "fres/classify.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "fres/normalize.hpp"

namespace fres {

const char* to_string(ClassifierStage s) {
    switch (s) {
        case ClassifierStage::AnswerRule: return "answer_rule";
        case ClassifierStage::ComparativeRule: return "comparative_rule";
        case ClassifierStage::LlmFallback: return "llm_fallback";
    }
    return "llm_fallback";
}

// ---------------------------------------------------------------------------
// Comparative lexicon
// ---------------------------------------------------------------------------

const ComparativeLexicon& ComparativeLexicon::defaults() {
    static const ComparativeLexicon instance(
        {
            // irregular comparatives and aggregation vocabulary
            "more", "most", "less", "least", "fewer", "fewest", "better", "best",
            "worse", "worst", "difference", "differences", "total", "sum",
            "average", "mean", "median", "maximum", "minimum", "combined",
            "altogether", "compare", "compared", "comparison", "majority",
            // frequent -er/-est forms, also reachable via the suffix heuristic
            "higher", "highest", "lower", "lowest", "larger", "largest",
            "smaller", "smallest", "longer", "longest", "shorter", "shortest",
            "earlier", "earliest", "later", "latest", "greater", "greatest",
            "bigger", "biggest", "older", "oldest", "younger", "youngest",
            "newer", "newest", "faster", "fastest", "slower", "slowest",
        },
        {
            // common -er/-est words that are not comparatives
            "after", "another", "answer", "brother", "career", "center",
            "chapter", "character", "chest", "computer", "contest", "corner",
            "cover", "customer", "daughter", "december", "dinner", "driver",
            "earnest", "either", "enter", "ever", "father", "forest", "guest",
            "harvest", "honest", "interest", "letter", "manager", "master",
            "matter", "member", "meter", "modest", "mother", "never", "november",
            "number", "october", "offer", "officer", "order", "other", "over",
            "paper", "partner", "player", "power", "protest", "quarter",
            "request", "rest", "river", "september", "silver", "singer",
            "sister", "soccer", "suggest", "summer", "super", "together",
            "under", "upper", "user", "water", "weather", "west", "whether",
            "winner", "winter", "wonder",
        });
    return instance;
}

ComparativeLexicon ComparativeLexicon::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon file: " + path);
    std::set<std::string> terms, exceptions;
    std::set<std::string>* section = nullptr;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string word;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c)))
                word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (word.empty()) continue;
        if (word == "[terms]") {
            section = &terms;
        } else if (word == "[suffix_exceptions]") {
            section = &exceptions;
        } else if (word.front() == '[') {
            throw ConfigError("lexicon " + path + " line " + std::to_string(line_no) +
                              ": unknown section " + word);
        } else {
            if (section == nullptr)
                throw ConfigError("lexicon " + path + " line " + std::to_string(line_no) +
                                  ": word before any section header");
            section->insert(word);
        }
    }
    return ComparativeLexicon(std::move(terms), std::move(exceptions));
}

bool ComparativeLexicon::matches_token(std::string_view token) const {
    std::string word(token);
    if (terms_.count(word)) return true;
    const bool er = word.size() >= 4 && word.ends_with("er");
    const bool est = word.size() >= 4 && word.ends_with("est");
    if ((er || est) && !suffix_exceptions_.count(word)) return true;
    return false;
}

bool contains_comparative(std::string_view question, const ComparativeLexicon& lexicon) {
    std::string token;
    const auto flush = [&] {
        bool hit = !token.empty() && lexicon.matches_token(token);
        token.clear();
        return hit;
    };
    for (char raw : question) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalpha(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else if (flush()) {
            return true;
        }
    }
    return flush();
}

// ---------------------------------------------------------------------------
// Classifier cascade
// ---------------------------------------------------------------------------

QuestionClassifier::QuestionClassifier(ClassifierOptions options)
    : options_(std::move(options)) {}

namespace {

// True when any gold answer, normalized, equals a cell or sits inside one as
// a whitespace-bounded substring.
bool answer_in_table(const Table& table, const std::vector<std::string>& gold_answers) {
    std::vector<std::string> normalized_golds;
    for (const std::string& gold : gold_answers) {
        std::string n = normalize_answer(gold);
        if (!n.empty()) normalized_golds.push_back(std::move(n));
    }
    if (normalized_golds.empty()) return false;
    const ExpandedGrid& grid = table.grid();
    for (const auto& row : grid.cells) {
        for (const ExpandedCell& cell : row) {
            if (cell.text.empty()) continue;
            const std::string cell_norm = normalize_answer(cell.text);
            for (const std::string& gold : normalized_golds)
                if (contains_normalized(cell_norm, gold)) return true;
        }
    }
    return false;
}

std::optional<QuestionType> parse_label_reply(std::string_view reply) {
    std::string token;
    std::optional<QuestionType> label;
    const auto flush = [&] {
        if (!label) {
            if (token == "retrieval") label = QuestionType::Retrieval;
            else if (token == "reasoning") label = QuestionType::Reasoning;
        }
        token.clear();
    };
    for (char raw : reply) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalpha(c)) token.push_back(static_cast<char>(std::tolower(c)));
        else flush();
        if (label) return label;
    }
    flush();
    return label;
}

}  // namespace

QuestionTypeResult QuestionClassifier::classify(const std::string& question,
                                                const Table& table,
                                                const std::vector<std::string>* gold_answers,
                                                ModelGateway* gateway, ClassifyMode mode,
                                                std::string_view request_key) const {
    if (mode == ClassifyMode::Construction) {
        if (gold_answers == nullptr || gold_answers->empty())
            throw ConfigError("construction-mode classification requires gold answers");
        if (!answer_in_table(table, *gold_answers)) {
            return {QuestionType::Reasoning, ClassifierStage::AnswerRule,
                    "no gold answer appears in any table cell"};
        }
    }

    if (contains_comparative(question, options_.lexicon))
        return {QuestionType::Reasoning, ClassifierStage::ComparativeRule,
                "question contains a comparative term"};

    if (options_.lexicon_only)
        return {QuestionType::Retrieval, ClassifierStage::ComparativeRule,
                "lexicon-only mode: no rule fired, defaulting to retrieval"};

    if (gateway == nullptr)
        throw ConfigError("LLM fallback reached but no gateway is configured");

    std::map<std::string, std::string> values;
    values["question"] = question;
    values["table"] = serialize_table(table, options_.layout, options_.serialize_options);
    PromptBundle bundle;
    bundle.template_id = "classify";
    bundle.user_text = expand_template(options_.llm_template, values);
    ModelReply reply = gateway->complete(bundle, request_key);

    std::optional<QuestionType> label = parse_label_reply(reply.text);
    if (!label)
        throw UnparseableLlmReply("classifier reply matches neither label: " + reply.text);
    return {*label, ClassifierStage::LlmFallback, std::nullopt};
}

}  // namespace fres
