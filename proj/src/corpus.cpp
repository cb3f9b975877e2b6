#include "fres/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace fres {

using nlohmann::ordered_json;

const char* to_string(QuestionType t) {
    return t == QuestionType::Retrieval ? "retrieval" : "reasoning";
}

const char* to_string(SizeClass c) {
    switch (c) {
        case SizeClass::Small: return "small";
        case SizeClass::Big: return "big";
        case SizeClass::Excluded: return "excluded";
    }
    return "excluded";
}

QuestionType question_type_from_string(std::string_view s) {
    if (s == "retrieval") return QuestionType::Retrieval;
    if (s == "reasoning") return QuestionType::Reasoning;
    throw MalformedInput("unknown question type: " + std::string(s));
}

SizeClass size_class_from_string(std::string_view s) {
    if (s == "small") return SizeClass::Small;
    if (s == "big") return SizeClass::Big;
    if (s == "excluded") return SizeClass::Excluded;
    throw MalformedInput("unknown size class: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Table JSON schema
// ---------------------------------------------------------------------------

namespace {

ordered_json cell_to_json(const Cell& cell) {
    if (cell.row_span == 1 && cell.col_span == 1) return cell.text;
    ordered_json j;
    j["text"] = cell.text;
    if (cell.row_span != 1) j["row_span"] = cell.row_span;
    if (cell.col_span != 1) j["col_span"] = cell.col_span;
    return j;
}

Cell cell_from_json(const ordered_json& j, bool is_header) {
    Cell cell;
    cell.is_header = is_header;
    if (j.is_string()) {
        cell.text = j.get<std::string>();
        return cell;
    }
    if (!j.is_object()) throw MalformedInput("table cell must be a string or object");
    cell.text = j.value("text", std::string{});
    cell.row_span = j.value("row_span", 1);
    cell.col_span = j.value("col_span", 1);
    if (cell.row_span < 1 || cell.col_span < 1)
        throw MalformedInput("cell spans must be >= 1");
    return cell;
}

std::vector<CellRow> rows_from_json(const ordered_json& j, bool is_header,
                                    const char* field) {
    if (!j.is_array())
        throw MalformedInput(std::string(field) + " must be an array of rows");
    std::vector<CellRow> rows;
    for (const auto& row_json : j) {
        if (!row_json.is_array())
            throw MalformedInput(std::string(field) + " rows must be arrays");
        CellRow row;
        for (const auto& cell_json : row_json)
            row.push_back(cell_from_json(cell_json, is_header));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

ordered_json table_to_json(const Table& table) {
    ordered_json j;
    ordered_json header = ordered_json::array();
    for (const CellRow& row : table.header_rows()) {
        ordered_json r = ordered_json::array();
        for (const Cell& cell : row) r.push_back(cell_to_json(cell));
        header.push_back(std::move(r));
    }
    ordered_json body = ordered_json::array();
    for (const CellRow& row : table.body_rows()) {
        ordered_json r = ordered_json::array();
        for (const Cell& cell : row) r.push_back(cell_to_json(cell));
        body.push_back(std::move(r));
    }
    j["header_rows"] = std::move(header);
    j["body_rows"] = std::move(body);
    if (table.caption()) j["caption"] = *table.caption();
    if (table.source_format() != SourceFormat::Native)
        j["source_format"] = to_string(table.source_format());
    return j;
}

Table table_from_json(const ordered_json& doc) {
    if (!doc.is_object()) throw MalformedInput("table must be a JSON object");
    auto header = rows_from_json(doc.value("header_rows", ordered_json::array()),
                                 true, "header_rows");
    auto body = rows_from_json(doc.value("body_rows", ordered_json::array()),
                               false, "body_rows");
    std::optional<std::string> caption;
    if (doc.contains("caption") && !doc.at("caption").is_null())
        caption = doc.at("caption").get<std::string>();
    SourceFormat format = SourceFormat::Native;
    if (doc.contains("source_format"))
        format = source_format_from_string(doc.at("source_format").get<std::string>());
    return Table::make(std::move(header), std::move(body), std::move(caption), format);
}

// ---------------------------------------------------------------------------
// QAInstance JSON
// ---------------------------------------------------------------------------

ordered_json instance_to_json(const QAInstance& instance) {
    ordered_json j;
    j["id"] = instance.id;
    j["dataset"] = instance.dataset;
    j["question"] = instance.question;
    j["table"] = table_to_json(instance.table);
    j["gold_answers"] = instance.gold_answers;
    if (instance.question_type) j["question_type"] = to_string(*instance.question_type);
    if (instance.size_class) j["size_class"] = to_string(*instance.size_class);
    if (instance.image_ref) j["image_ref"] = *instance.image_ref;
    if (!instance.metadata.empty()) j["metadata"] = instance.metadata;
    return j;
}

QAInstance instance_from_json(const ordered_json& doc) {
    if (!doc.is_object()) throw MalformedInput("corpus record must be a JSON object");
    QAInstance inst;
    try {
        inst.id = doc.at("id").get<std::string>();
        inst.dataset = doc.value("dataset", std::string{});
        inst.question = doc.at("question").get<std::string>();
        inst.table = table_from_json(doc.at("table"));
        inst.gold_answers = doc.at("gold_answers").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput(std::string("corpus record: ") + e.what());
    }
    if (inst.id.empty()) throw MalformedInput("corpus record has empty id");
    if (inst.gold_answers.empty())
        throw MalformedInput("instance " + inst.id + " has no gold answers");
    if (doc.contains("question_type") && !doc.at("question_type").is_null())
        inst.question_type =
            question_type_from_string(doc.at("question_type").get<std::string>());
    if (doc.contains("size_class") && !doc.at("size_class").is_null())
        inst.size_class = size_class_from_string(doc.at("size_class").get<std::string>());
    if (doc.contains("image_ref") && !doc.at("image_ref").is_null())
        inst.image_ref = doc.at("image_ref").get<std::string>();
    if (doc.contains("metadata") && !doc.at("metadata").is_null())
        inst.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
    return inst;
}

// ---------------------------------------------------------------------------
// JSONL I/O
// ---------------------------------------------------------------------------

std::vector<QAInstance> parse_corpus(std::string_view jsonl) {
    std::vector<QAInstance> corpus;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= jsonl.size()) {
        std::size_t end = jsonl.find('\n', start);
        std::string_view line = jsonl.substr(
            start, end == std::string_view::npos ? std::string_view::npos : end - start);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) {
            ordered_json doc;
            try {
                doc = ordered_json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw MalformedInput("corpus line " + std::to_string(line_no) + ": " +
                                     e.what());
            }
            QAInstance inst = instance_from_json(doc);
            if (!ids.insert(inst.id).second)
                throw MalformedInput("duplicate instance id: " + inst.id);
            corpus.push_back(std::move(inst));
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return corpus;
}

std::vector<QAInstance> read_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_corpus(buffer.str());
}

std::string corpus_to_jsonl(const std::vector<QAInstance>& corpus) {
    std::ostringstream os;
    for (const QAInstance& inst : corpus) os << instance_to_json(inst).dump() << '\n';
    return os.str();
}

void write_corpus(const std::vector<QAInstance>& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file: " + path);
    out << corpus_to_jsonl(corpus);
}

}  // namespace fres
