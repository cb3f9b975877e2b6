#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fres/table.hpp"

namespace fres {

enum class QuestionType { Retrieval, Reasoning };
enum class SizeClass { Small, Big, Excluded };

const char* to_string(QuestionType t);
const char* to_string(SizeClass c);
QuestionType question_type_from_string(std::string_view s);
SizeClass size_class_from_string(std::string_view s);

// One question over one table. Immutable by convention once loaded;
// annotation passes produce updated copies.
struct QAInstance {
    std::string id;
    std::string dataset;
    std::string question;
    Table table = Table::from_strings({}, {{""}});
    std::vector<std::string> gold_answers;
    std::optional<QuestionType> question_type;
    std::optional<SizeClass> size_class;
    std::optional<std::string> image_ref;
    std::map<std::string, std::string> metadata;
};

// Table <-> JSON, the schema embedded in corpus records. Rows are arrays;
// a cell is a bare string when it spans 1x1, otherwise an object with
// "text" / "row_span" / "col_span".
nlohmann::ordered_json table_to_json(const Table& table);
Table table_from_json(const nlohmann::ordered_json& doc);

nlohmann::ordered_json instance_to_json(const QAInstance& instance);
QAInstance instance_from_json(const nlohmann::ordered_json& doc);

// Line-delimited corpus I/O. Duplicate ids and empty gold answers are
// format violations.
std::vector<QAInstance> read_corpus(const std::string& path);
std::vector<QAInstance> parse_corpus(std::string_view jsonl);
void write_corpus(const std::vector<QAInstance>& corpus, const std::string& path);
std::string corpus_to_jsonl(const std::vector<QAInstance>& corpus);

}  // namespace fres
