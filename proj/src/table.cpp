#include "fres/table.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fres/corpus.hpp"

namespace fres {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string single_line(std::string_view text) {
    std::string out(text);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Table construction and span expansion
// ---------------------------------------------------------------------------

namespace {

// Expands one section (header or body) onto an occupancy grid. Spans are
// normalized in place: values < 1 clamp to 1, row spans clip at the section
// boundary. Returns per-position owner indices, -1 for padding.
std::vector<std::vector<std::pair<int, int>>> expand_section(std::vector<CellRow>& rows) {
    std::vector<std::vector<std::pair<int, int>>> grid(rows.size());
    const auto occupied = [&](std::size_t r, std::size_t c) {
        return c < grid[r].size() && grid[r][c].first != -1;
    };
    const auto place = [&](std::size_t r, std::size_t c, int or_, int oc_) {
        if (grid[r].size() <= c) grid[r].resize(c + 1, {-1, -1});
        grid[r][c] = {or_, oc_};
    };

    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < rows[r].size(); ++i) {
            Cell& cell = rows[r][i];
            while (occupied(r, c)) ++c;
            cell.col_span = std::max(1, cell.col_span);
            cell.row_span = std::max(1, cell.row_span);
            cell.row_span = std::min<int>(cell.row_span, static_cast<int>(rows.size() - r));
            for (int rr = 0; rr < cell.row_span; ++rr)
                for (int cc = 0; cc < cell.col_span; ++cc)
                    place(r + rr, c + cc, static_cast<int>(r), static_cast<int>(i));
            c += static_cast<std::size_t>(cell.col_span);
        }
    }
    return grid;
}

}  // namespace

Table Table::make(std::vector<CellRow> header_rows, std::vector<CellRow> body_rows,
                  std::optional<std::string> caption, SourceFormat source_format) {
    // Zero-cell logical rows carry no grid content; drop them.
    std::erase_if(header_rows, [](const CellRow& r) { return r.empty(); });
    std::erase_if(body_rows, [](const CellRow& r) { return r.empty(); });

    if (header_rows.empty() && body_rows.empty())
        throw EmptyTable("table has no cells");

    for (auto& row : header_rows)
        for (auto& cell : row) cell.is_header = true;

    Table t;
    t.caption_ = std::move(caption);
    t.source_format_ = source_format;

    auto header_grid = expand_section(header_rows);
    auto body_grid = expand_section(body_rows);
    t.header_rows_ = std::move(header_rows);
    t.body_rows_ = std::move(body_rows);

    std::size_t width = 0;
    for (const auto& r : header_grid) width = std::max(width, r.size());
    for (const auto& r : body_grid) width = std::max(width, r.size());

    t.grid_.header_row_count = header_grid.size();
    t.grid_.cells.reserve(header_grid.size() + body_grid.size());
    const auto emit = [&](const std::vector<std::vector<std::pair<int, int>>>& section_grid,
                          const std::vector<CellRow>& section, bool is_header) {
        for (const auto& row : section_grid) {
            std::vector<ExpandedCell> out(width);
            for (std::size_t c = 0; c < width; ++c) {
                ExpandedCell& ec = out[c];
                ec.is_header = is_header;
                if (c < row.size() && row[c].first != -1) {
                    ec.origin_row = row[c].first;
                    ec.origin_col = row[c].second;
                    ec.text = section[row[c].first][row[c].second].text;
                }
            }
            t.grid_.cells.push_back(std::move(out));
        }
    };
    emit(header_grid, t.header_rows_, true);
    emit(body_grid, t.body_rows_, false);

    bool spanned_header = false;
    for (const auto& row : t.header_rows_)
        for (const auto& cell : row)
            if (cell.row_span > 1 || cell.col_span > 1) spanned_header = true;
    t.structure_ = (t.header_rows_.size() > 1 || spanned_header)
                       ? TableStructure::Hierarchical
                       : TableStructure::Flat;
    return t;
}

Table Table::from_strings(const std::vector<std::vector<std::string>>& header,
                          const std::vector<std::vector<std::string>>& body) {
    std::vector<CellRow> h, b;
    for (const auto& row : header) {
        CellRow r;
        for (const auto& text : row) r.push_back(Cell{text, 1, 1, true});
        h.push_back(std::move(r));
    }
    for (const auto& row : body) {
        CellRow r;
        for (const auto& text : row) r.push_back(Cell{text, 1, 1, false});
        b.push_back(std::move(r));
    }
    return make(std::move(h), std::move(b));
}

std::size_t count_cells(const Table& table) {
    return table.row_count() * table.column_count();
}

// ---------------------------------------------------------------------------
// Markdown
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_markdown_row(std::string_view line) {
    std::string_view s = trim(line);
    std::vector<std::string> cells;
    std::string current;
    bool escaped = false;
    // Boundary pipes delimit; cells between them, backslash escapes a pipe.
    std::size_t i = 0;
    if (!s.empty() && s.front() == '|') i = 1;
    bool saw_terminal_pipe = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (escaped) {
            if (c != '|') current.push_back('\\');
            current.push_back(c);
            escaped = false;
        } else if (c == '\\') {
            escaped = true;
        } else if (c == '|') {
            cells.push_back(current);
            current.clear();
            saw_terminal_pipe = (i + 1 == s.size());
        } else {
            current.push_back(c);
        }
    }
    if (escaped) current.push_back('\\');
    if (!saw_terminal_pipe) cells.push_back(current);
    for (auto& c : cells) c = std::string(trim(c));
    return cells;
}

bool is_separator_row(const std::vector<std::string>& cells) {
    if (cells.empty()) return false;
    for (const auto& c : cells) {
        std::string_view s = trim(c);
        if (s.empty()) return false;
        std::size_t dashes = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '-') {
                ++dashes;
            } else if (s[i] == ':') {
                if (i != 0 && i + 1 != s.size()) return false;
            } else {
                return false;
            }
        }
        if (dashes == 0) return false;
    }
    return true;
}

Table parse_markdown(std::string_view input) {
    std::vector<std::vector<std::string>> rows;
    std::size_t start = 0;
    while (start <= input.size()) {
        std::size_t end = input.find('\n', start);
        std::string_view line = input.substr(
            start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!is_blank(line)) {
            if (line.find('|') == std::string_view::npos)
                throw MalformedInput("markdown row without a cell delimiter: " +
                                     std::string(trim(line)));
            rows.push_back(split_markdown_row(line));
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    if (rows.empty()) throw EmptyTable("no markdown table rows");

    std::size_t width = 0;
    for (const auto& r : rows) width = std::max(width, r.size());
    for (auto& r : rows) r.resize(width);  // ragged rows right-pad with empties

    std::vector<std::vector<std::string>> header, body;
    if (rows.size() >= 2 && is_separator_row(rows[1]) && !is_separator_row(rows[0])) {
        header.push_back(rows[0]);
        body.assign(rows.begin() + 2, rows.end());
    } else {
        body = rows;
    }
    Table t = Table::from_strings(header, body);
    return Table::make(
        std::vector<CellRow>(t.header_rows()), std::vector<CellRow>(t.body_rows()),
        std::nullopt, SourceFormat::Markdown);
}

std::string escape_markdown_cell(std::string_view text) {
    std::string out;
    for (char c : single_line(text)) {
        if (c == '|') out += "\\|";
        else out.push_back(c);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// HTML
// ---------------------------------------------------------------------------

namespace {

std::string decode_entities(std::string_view s) {
    static const std::map<std::string, std::string, std::less<>> named = {
        {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""},
        {"apos", "'"}, {"nbsp", " "}, {"#39", "'"},
    };
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 9) {
            out.push_back(s[i++]);
            continue;
        }
        std::string_view name = s.substr(i + 1, semi - i - 1);
        if (auto it = named.find(name); it != named.end()) {
            out += it->second;
            i = semi + 1;
        } else if (name.size() >= 2 && name[0] == '#') {
            long code = 0;
            bool ok = true;
            if (name[1] == 'x' || name[1] == 'X') {
                for (char c : name.substr(2)) {
                    if (!std::isxdigit(static_cast<unsigned char>(c))) { ok = false; break; }
                    code = code * 16 + (std::isdigit(static_cast<unsigned char>(c))
                                            ? c - '0'
                                            : std::tolower(c) - 'a' + 10);
                }
                ok = ok && name.size() > 2;
            } else {
                for (char c : name.substr(1)) {
                    if (!std::isdigit(static_cast<unsigned char>(c))) { ok = false; break; }
                    code = code * 10 + (c - '0');
                }
            }
            if (ok && code > 0 && code < 0x110000) {
                // UTF-8 encode
                unsigned long cp = static_cast<unsigned long>(code);
                if (cp < 0x80) {
                    out.push_back(static_cast<char>(cp));
                } else if (cp < 0x800) {
                    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                } else if (cp < 0x10000) {
                    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                } else {
                    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                }
                i = semi + 1;
            } else {
                out.push_back(s[i++]);
            }
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

struct HtmlTag {
    std::string name;
    bool closing = false;
    std::map<std::string, std::string> attrs;
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

class HtmlTableParser {
public:
    explicit HtmlTableParser(std::string_view input) : in_(input) {}

    Table parse() {
        while (pos_ < in_.size()) {
            std::size_t lt = in_.find('<', pos_);
            if (lt == std::string_view::npos) break;
            if (in_table_ && cell_open_) text_ += in_.substr(pos_, lt - pos_);
            pos_ = lt;
            if (in_.compare(pos_, 4, "<!--") == 0) {
                std::size_t end = in_.find("-->", pos_);
                if (end == std::string_view::npos)
                    throw MalformedInput("unterminated HTML comment");
                pos_ = end + 3;
                continue;
            }
            if (pos_ + 1 < in_.size() && in_[pos_ + 1] == '!') {
                std::size_t end = in_.find('>', pos_);
                if (end == std::string_view::npos)
                    throw MalformedInput("unterminated declaration");
                pos_ = end + 1;
                continue;
            }
            handle_tag(read_tag());
        }
        if (in_table_) throw MalformedInput("table element never closed");
        if (!table_done_) throw MalformedInput("input contains no table element");
        return Table::make(std::move(header_rows_), std::move(body_rows_),
                           caption_, SourceFormat::Html);
    }

private:
    HtmlTag read_tag() {
        // pos_ at '<'
        std::size_t i = pos_ + 1;
        HtmlTag tag;
        if (i < in_.size() && in_[i] == '/') {
            tag.closing = true;
            ++i;
        }
        std::size_t name_start = i;
        while (i < in_.size() && (std::isalnum(static_cast<unsigned char>(in_[i])))) ++i;
        tag.name = lower(in_.substr(name_start, i - name_start));
        if (tag.name.empty()) throw MalformedInput("malformed HTML tag");
        // attributes
        while (i < in_.size() && in_[i] != '>') {
            if (std::isspace(static_cast<unsigned char>(in_[i])) || in_[i] == '/') {
                ++i;
                continue;
            }
            std::size_t key_start = i;
            while (i < in_.size() && in_[i] != '=' && in_[i] != '>' &&
                   !std::isspace(static_cast<unsigned char>(in_[i])))
                ++i;
            std::string key = lower(in_.substr(key_start, i - key_start));
            std::string value;
            while (i < in_.size() && std::isspace(static_cast<unsigned char>(in_[i]))) ++i;
            if (i < in_.size() && in_[i] == '=') {
                ++i;
                while (i < in_.size() && std::isspace(static_cast<unsigned char>(in_[i]))) ++i;
                if (i < in_.size() && (in_[i] == '"' || in_[i] == '\'')) {
                    char q = in_[i++];
                    std::size_t vstart = i;
                    while (i < in_.size() && in_[i] != q) ++i;
                    if (i == in_.size()) throw MalformedInput("unterminated attribute value");
                    value = std::string(in_.substr(vstart, i - vstart));
                    ++i;
                } else {
                    std::size_t vstart = i;
                    while (i < in_.size() && in_[i] != '>' &&
                           !std::isspace(static_cast<unsigned char>(in_[i])))
                        ++i;
                    value = std::string(in_.substr(vstart, i - vstart));
                }
            }
            if (!key.empty()) tag.attrs[key] = value;
        }
        if (i >= in_.size()) throw MalformedInput("unterminated HTML tag");
        pos_ = i + 1;
        return tag;
    }

    static int span_attr(const HtmlTag& tag, const char* name) {
        auto it = tag.attrs.find(name);
        if (it == tag.attrs.end()) return 1;
        try {
            int v = std::stoi(it->second);
            return std::max(1, v);
        } catch (const std::exception&) {
            return 1;
        }
    }

    void close_cell() {
        if (!cell_open_) return;
        pending_cell_.text = decode_entities(text_);
        current_row_.push_back(pending_cell_);
        text_.clear();
        cell_open_ = false;
    }

    void close_row() {
        close_cell();
        if (!row_open_) return;
        bool all_header = !current_row_.empty() &&
                          std::all_of(current_row_.begin(), current_row_.end(),
                                      [](const Cell& c) { return c.is_header; });
        bool header_row = in_thead_ || (!seen_thead_ && !seen_body_row_ && all_header);
        if (header_row) {
            header_rows_.push_back(std::move(current_row_));
        } else {
            if (!current_row_.empty()) seen_body_row_ = true;
            body_rows_.push_back(std::move(current_row_));
        }
        current_row_.clear();
        row_open_ = false;
    }

    void handle_tag(const HtmlTag& tag) {
        const std::string& n = tag.name;
        if (n == "table") {
            if (!tag.closing) {
                if (in_table_) throw MalformedInput("nested table element");
                if (table_done_) throw MalformedInput("more than one table element");
                in_table_ = true;
            } else {
                if (!in_table_) throw MalformedInput("stray closing table tag");
                close_row();
                in_table_ = false;
                table_done_ = true;
            }
            return;
        }
        if (!in_table_) return;  // markup outside the table is not ours to validate

        if (n == "thead") {
            close_row();
            in_thead_ = !tag.closing;
            if (!tag.closing) seen_thead_ = true;
            return;
        }
        if (n == "tbody" || n == "tfoot") {
            close_row();
            if (!tag.closing) seen_body_section_ = true;
            return;
        }
        if (n == "tr") {
            if (tag.closing) {
                if (!row_open_) throw MalformedInput("stray closing tr tag");
                close_row();
            } else {
                close_row();
                row_open_ = true;
            }
            return;
        }
        if (n == "td" || n == "th") {
            if (tag.closing) {
                if (!cell_open_) throw MalformedInput("stray closing cell tag");
                close_cell();
            } else {
                if (!row_open_) throw MalformedInput("cell outside a table row");
                close_cell();
                pending_cell_ = Cell{};
                pending_cell_.is_header = (n == "th") || in_thead_;
                pending_cell_.col_span = span_attr(tag, "colspan");
                pending_cell_.row_span = span_attr(tag, "rowspan");
                cell_open_ = true;
            }
            return;
        }
        if (n == "caption") {
            if (!tag.closing) {
                std::size_t end = in_.find("</caption", pos_);
                if (end == std::string_view::npos)
                    throw MalformedInput("unterminated caption");
                caption_ = decode_entities(in_.substr(pos_, end - pos_));
                pos_ = in_.find('>', end);
                if (pos_ == std::string_view::npos)
                    throw MalformedInput("unterminated caption");
                ++pos_;
            }
            return;
        }
        if (n == "br") {
            if (cell_open_) text_ += ' ';
            return;
        }
        // Other inline markup inside cells is stripped; its text flows through.
    }

    std::string_view in_;
    std::size_t pos_ = 0;

    bool in_table_ = false;
    bool table_done_ = false;
    bool in_thead_ = false;
    bool seen_thead_ = false;
    bool seen_body_section_ = false;
    bool seen_body_row_ = false;
    bool row_open_ = false;
    bool cell_open_ = false;

    Cell pending_cell_;
    std::string text_;
    CellRow current_row_;
    std::vector<CellRow> header_rows_;
    std::vector<CellRow> body_rows_;
    std::optional<std::string> caption_;
};

std::string escape_html(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

void emit_html_row(std::ostringstream& os, const CellRow& row) {
    os << "<tr>";
    for (const Cell& cell : row) {
        const char* tag = cell.is_header ? "th" : "td";
        os << '<' << tag;
        if (cell.col_span > 1) os << " colspan=\"" << cell.col_span << '"';
        if (cell.row_span > 1) os << " rowspan=\"" << cell.row_span << '"';
        os << '>' << escape_html(cell.text) << "</" << tag << '>';
    }
    os << "</tr>\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view input) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < input.size()) {
        char c = input[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < input.size() && input[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
        } else if (c == '"' && !field_started && field.empty()) {
            in_quotes = true;
            field_started = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < input.size() && input[i + 1] == '\n') {
            end_row();
            i += 2;
        } else if (c == '\n') {
            end_row();
            ++i;
        } else {
            field.push_back(c);
            field_started = true;
            ++i;
        }
    }
    if (in_quotes) throw MalformedInput("unterminated quoted CSV field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    // A lone trailing newline yields a phantom empty row; drop it.
    while (!rows.empty() && rows.back().size() == 1 && rows.back().front().empty())
        rows.pop_back();
    return rows;
}

Table parse_csv(std::string_view input, bool has_header) {
    auto rows = parse_csv_rows(input);
    if (rows.empty()) throw EmptyTable("no CSV rows");
    std::size_t width = 0;
    for (const auto& r : rows) width = std::max(width, r.size());
    for (auto& r : rows) r.resize(width);
    std::vector<std::vector<std::string>> header, body;
    if (has_header) {
        header.push_back(rows.front());
        body.assign(rows.begin() + 1, rows.end());
    } else {
        body = rows;
    }
    Table t = Table::from_strings(header, body);
    return Table::make(std::vector<CellRow>(t.header_rows()),
                       std::vector<CellRow>(t.body_rows()), std::nullopt,
                       SourceFormat::Csv);
}

// ---------------------------------------------------------------------------
// JSON records
// ---------------------------------------------------------------------------

std::string json_value_to_text(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
}

Table parse_json_records(std::string_view input) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(input);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw MalformedInput("JSON records input must be an array of objects");
    if (doc.empty()) throw EmptyTable("empty JSON record array");

    std::vector<std::string> keys;
    for (const auto& rec : doc) {
        if (!rec.is_object()) throw MalformedInput("JSON record is not an object");
        for (const auto& item : rec.items())
            if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
                keys.push_back(item.key());
    }
    std::vector<std::vector<std::string>> body;
    for (const auto& rec : doc) {
        std::vector<std::string> row;
        row.reserve(keys.size());
        for (const auto& k : keys)
            row.push_back(rec.contains(k) ? json_value_to_text(rec.at(k)) : "");
        body.push_back(std::move(row));
    }
    Table t = Table::from_strings({keys}, body);
    return Table::make(std::vector<CellRow>(t.header_rows()),
                       std::vector<CellRow>(t.body_rows()), std::nullopt,
                       SourceFormat::JsonRecords);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public parse / serialize
// ---------------------------------------------------------------------------

Table parse_table(std::string_view input, SourceFormat format, const ParseOptions& options) {
    switch (format) {
        case SourceFormat::Markdown: return parse_markdown(input);
        case SourceFormat::Html: return HtmlTableParser(input).parse();
        case SourceFormat::Csv: return parse_csv(input, options.csv_has_header);
        case SourceFormat::JsonRecords: return parse_json_records(input);
        case SourceFormat::Native: {
            nlohmann::ordered_json doc;
            try {
                doc = nlohmann::ordered_json::parse(input);
            } catch (const nlohmann::json::exception& e) {
                throw MalformedInput(std::string("invalid JSON: ") + e.what());
            }
            return table_from_json(doc);
        }
    }
    throw MalformedInput("unknown source format");
}

namespace {

// One flattened header cell per column: parent texts joined top-down,
// span duplicates and empties skipped.
std::vector<std::string> flatten_header_columns(const Table& table, const std::string& join) {
    const ExpandedGrid& grid = table.grid();
    std::vector<std::string> out(grid.cols());
    for (std::size_t c = 0; c < grid.cols(); ++c) {
        std::string joined;
        std::pair<int, int> last_origin{-2, -2};
        for (std::size_t r = 0; r < grid.header_row_count; ++r) {
            const ExpandedCell& ec = grid.cells[r][c];
            std::pair<int, int> origin{ec.origin_row, ec.origin_col};
            if (origin == last_origin && origin.first != -1) continue;
            last_origin = origin;
            if (ec.text.empty()) continue;
            if (!joined.empty()) joined += join;
            joined += ec.text;
        }
        out[c] = std::move(joined);
    }
    return out;
}

std::string serialize_markdown(const Table& table, const SerializeOptions& options) {
    const ExpandedGrid& grid = table.grid();
    std::ostringstream os;
    const auto emit_row = [&](const std::vector<std::string>& cells) {
        os << '|';
        for (const auto& text : cells) os << ' ' << escape_markdown_cell(text) << " |";
        os << '\n';
    };

    std::vector<std::string> header;
    if (grid.header_row_count > 0) {
        if (table.structure() == TableStructure::Hierarchical) {
            if (!options.flatten_hierarchical)
                throw UnsupportedLayout(
                    "hierarchical table cannot serialize to markdown without flattening");
            header = flatten_header_columns(table, options.flatten_join);
        } else {
            for (const ExpandedCell& ec : grid.cells[0]) header.push_back(ec.text);
        }
        emit_row(header);
        os << '|';
        for (std::size_t c = 0; c < grid.cols(); ++c) os << "---|";
        os << '\n';
    }
    for (std::size_t r = grid.header_row_count; r < grid.rows(); ++r) {
        std::vector<std::string> cells;
        for (const ExpandedCell& ec : grid.cells[r]) cells.push_back(ec.text);
        emit_row(cells);
    }
    std::string out = os.str();
    if (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

std::string serialize_html(const Table& table) {
    std::ostringstream os;
    os << "<table>\n";
    if (table.caption())
        os << "<caption>" << escape_html(*table.caption()) << "</caption>\n";
    if (!table.header_rows().empty()) {
        os << "<thead>\n";
        for (const CellRow& row : table.header_rows()) emit_html_row(os, row);
        os << "</thead>\n";
    }
    if (!table.body_rows().empty()) {
        os << "<tbody>\n";
        for (const CellRow& row : table.body_rows()) emit_html_row(os, row);
        os << "</tbody>\n";
    }
    os << "</table>";
    return os.str();
}

std::string serialize_plain_rows(const Table& table) {
    const ExpandedGrid& grid = table.grid();
    std::ostringstream os;
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        if (r > 0) os << '\n';
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            if (c > 0) os << " | ";
            os << single_line(grid.cells[r][c].text);
        }
    }
    return os.str();
}

}  // namespace

std::string serialize_table(const Table& table, TableLayout layout,
                            const SerializeOptions& options) {
    switch (layout) {
        case TableLayout::Markdown: return serialize_markdown(table, options);
        case TableLayout::Html: return serialize_html(table);
        case TableLayout::PlainRows: return serialize_plain_rows(table);
    }
    throw UnsupportedLayout("unknown table layout");
}

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

const char* to_string(TableStructure s) {
    return s == TableStructure::Flat ? "flat" : "hierarchical";
}

const char* to_string(SourceFormat f) {
    switch (f) {
        case SourceFormat::Markdown: return "markdown";
        case SourceFormat::Html: return "html";
        case SourceFormat::Csv: return "csv";
        case SourceFormat::JsonRecords: return "json_records";
        case SourceFormat::Native: return "native";
    }
    return "native";
}

const char* to_string(TableLayout l) {
    switch (l) {
        case TableLayout::Markdown: return "markdown";
        case TableLayout::Html: return "html";
        case TableLayout::PlainRows: return "plain_rows";
    }
    return "markdown";
}

SourceFormat source_format_from_string(std::string_view s) {
    if (s == "markdown" || s == "md") return SourceFormat::Markdown;
    if (s == "html") return SourceFormat::Html;
    if (s == "csv") return SourceFormat::Csv;
    if (s == "json_records" || s == "json") return SourceFormat::JsonRecords;
    if (s == "native") return SourceFormat::Native;
    throw ConfigError("unknown source format: " + std::string(s));
}

TableLayout table_layout_from_string(std::string_view s) {
    if (s == "markdown" || s == "md") return TableLayout::Markdown;
    if (s == "html") return TableLayout::Html;
    if (s == "plain_rows" || s == "plain") return TableLayout::PlainRows;
    throw ConfigError("unknown table layout: " + std::string(s));
}

}  // namespace fres
