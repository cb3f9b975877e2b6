#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fres/errors.hpp"

namespace fres {

enum class TableStructure { Flat, Hierarchical };
enum class SourceFormat { Markdown, Html, Csv, JsonRecords, Native };
enum class TableLayout { Markdown, Html, PlainRows };

struct Cell {
    std::string text;
    int row_span = 1;
    int col_span = 1;
    bool is_header = false;

    bool operator==(const Cell&) const = default;
};

using CellRow = std::vector<Cell>;

// One grid position of the span-expanded table.
struct ExpandedCell {
    std::string text;
    bool is_header = false;
    // Index of the originating logical cell within its section, or -1 for
    // synthetic padding cells inserted to square off ragged rows.
    int origin_row = -1;
    int origin_col = -1;
};

struct ExpandedGrid {
    std::vector<std::vector<ExpandedCell>> cells;
    std::size_t header_row_count = 0;

    std::size_t rows() const { return cells.size(); }
    std::size_t cols() const { return cells.empty() ? 0 : cells.front().size(); }
};

// Canonical table: logical header/body rows whose spans expand to a
// rectangular grid. Immutable after construction; construction validates
// the grid invariants. Spans never cross the header/body boundary.
class Table {
public:
    // Validates, pads ragged rows on the right, clips spans to their
    // section, and classifies the structure. Throws EmptyTable when both
    // sections are empty, MalformedInput on irreparable geometry.
    static Table make(std::vector<CellRow> header_rows,
                      std::vector<CellRow> body_rows,
                      std::optional<std::string> caption = std::nullopt,
                      SourceFormat source_format = SourceFormat::Native);

    // Convenience for tests and fixtures: rows of 1x1 cells.
    static Table from_strings(const std::vector<std::vector<std::string>>& header,
                              const std::vector<std::vector<std::string>>& body);

    const std::vector<CellRow>& header_rows() const { return header_rows_; }
    const std::vector<CellRow>& body_rows() const { return body_rows_; }
    TableStructure structure() const { return structure_; }
    const std::optional<std::string>& caption() const { return caption_; }
    SourceFormat source_format() const { return source_format_; }

    const ExpandedGrid& grid() const { return grid_; }
    std::size_t row_count() const { return grid_.rows(); }
    std::size_t column_count() const { return grid_.cols(); }

    // Cell-structure equality: header/body cells, spans, and structure.
    // Caption and source format are provenance and do not participate.
    bool operator==(const Table& other) const {
        return header_rows_ == other.header_rows_ && body_rows_ == other.body_rows_;
    }

private:
    Table() = default;

    std::vector<CellRow> header_rows_;
    std::vector<CellRow> body_rows_;
    TableStructure structure_ = TableStructure::Flat;
    std::optional<std::string> caption_;
    SourceFormat source_format_ = SourceFormat::Native;
    ExpandedGrid grid_;
};

struct ParseOptions {
    bool csv_has_header = true;
};

struct SerializeOptions {
    // Multi-level headers collapse to one row, parent and child joined by
    // flatten_join, before markdown emission. Off -> UnsupportedLayout for
    // hierarchical tables.
    bool flatten_hierarchical = true;
    std::string flatten_join = " / ";
};

Table parse_table(std::string_view input, SourceFormat format,
                  const ParseOptions& options = {});

std::string serialize_table(const Table& table, TableLayout layout,
                            const SerializeOptions& options = {});

// Expanded rows x columns.
std::size_t count_cells(const Table& table);

const char* to_string(TableStructure s);
const char* to_string(SourceFormat f);
const char* to_string(TableLayout l);
SourceFormat source_format_from_string(std::string_view s);
TableLayout table_layout_from_string(std::string_view s);

}  // namespace fres
