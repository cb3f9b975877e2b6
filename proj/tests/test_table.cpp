#include <doctest.h>

#include <random>

#include "fres/table.hpp"
#include "html_fixtures.hpp"
#include "support.hpp"

using namespace fres;

namespace {

std::vector<std::vector<std::string>> grid_texts(const Table& t) {
    std::vector<std::vector<std::string>> out;
    for (const auto& row : t.grid().cells) {
        std::vector<std::string> texts;
        for (const auto& cell : row) texts.push_back(cell.text);
        out.push_back(std::move(texts));
    }
    return out;
}

constexpr const char* kCanonicalMarkdown = "| a | b |\n|---|---|\n| 1 | 2 |";

}  // namespace

TEST_CASE("markdown 2x2 parses to flat header/body") {
    Table t = parse_table(kCanonicalMarkdown, SourceFormat::Markdown);
    REQUIRE(t.header_rows().size() == 1);
    REQUIRE(t.body_rows().size() == 1);
    CHECK(t.header_rows()[0][0].text == "a");
    CHECK(t.header_rows()[0][1].text == "b");
    CHECK(t.body_rows()[0][0].text == "1");
    CHECK(t.body_rows()[0][1].text == "2");
    CHECK(t.structure() == TableStructure::Flat);
    CHECK(t.source_format() == SourceFormat::Markdown);
    CHECK(t.header_rows()[0][0].is_header);
}

TEST_CASE("html colspan header expands and classifies hierarchical") {
    Table t = parse_table(
        "<table><tr><th colspan=2>x</th></tr><tr><td>1</td><td>2</td></tr></table>",
        SourceFormat::Html);
    CHECK(t.column_count() == 2);
    CHECK(t.header_rows().size() == 1);
    CHECK(t.header_rows()[0][0].col_span == 2);
    CHECK(t.structure() == TableStructure::Hierarchical);
    CHECK(grid_texts(t) ==
          std::vector<std::vector<std::string>>{{"x", "x"}, {"1", "2"}});
}

TEST_CASE("csv with header flag matches the markdown grid") {
    Table csv = parse_table("a,b\n1,2", SourceFormat::Csv, {.csv_has_header = true});
    Table md = parse_table(kCanonicalMarkdown, SourceFormat::Markdown);
    CHECK(csv == md);
    CHECK(csv.structure() == TableStructure::Flat);

    Table headerless = parse_table("a,b\n1,2", SourceFormat::Csv,
                                   {.csv_has_header = false});
    CHECK(headerless.header_rows().empty());
    CHECK(headerless.body_rows().size() == 2);
}

TEST_CASE("csv quoting: commas, escaped quotes, embedded newline") {
    Table t = parse_table("a,b\n\"1,5\",\"say \"\"hi\"\"\"\n\"multi\nline\",x",
                          SourceFormat::Csv);
    CHECK(t.body_rows()[0][0].text == "1,5");
    CHECK(t.body_rows()[0][1].text == "say \"hi\"");
    CHECK(t.body_rows()[1][0].text == "multi\nline");
}

TEST_CASE("json records parse with first-seen key order") {
    Table t = parse_table(R"([{"name":"ada","score":3},{"name":"bob","extra":true}])",
                          SourceFormat::JsonRecords);
    REQUIRE(t.header_rows().size() == 1);
    CHECK(t.header_rows()[0][0].text == "name");
    CHECK(t.header_rows()[0][1].text == "score");
    CHECK(t.header_rows()[0][2].text == "extra");
    CHECK(t.body_rows()[0][1].text == "3");
    CHECK(t.body_rows()[1][1].text == "");
    CHECK(t.body_rows()[1][2].text == "true");
}

TEST_CASE("flat serialization is canonical and round-trips the string") {
    Table t = Table::from_strings({{"a", "b"}}, {{"1", "2"}});
    const std::string md = serialize_table(t, TableLayout::Markdown);
    CHECK(md == kCanonicalMarkdown);
    CHECK(serialize_table(parse_table(md, SourceFormat::Markdown), TableLayout::Markdown) ==
          md);
}

TEST_CASE("hierarchical header flattens with the join separator") {
    std::vector<CellRow> header = {
        {Cell{"Group", 1, 2, true}, Cell{"Season", 2, 1, true}},
        {Cell{"Home", 1, 1, true}, Cell{"Away", 1, 1, true}},
    };
    std::vector<CellRow> body = {
        {Cell{"3"}, Cell{"1"}, Cell{"2021"}},
        {Cell{"2"}, Cell{"4"}, Cell{"2022"}},
    };
    Table t = Table::make(header, body);
    REQUIRE(t.structure() == TableStructure::Hierarchical);

    const std::string md = serialize_table(t, TableLayout::Markdown);
    CHECK(md ==
          "| Group / Home | Group / Away | Season |\n|---|---|---|\n"
          "| 3 | 1 | 2021 |\n| 2 | 4 | 2022 |");
    Table back = parse_table(md, SourceFormat::Markdown);
    CHECK(back.header_rows()[0][0].text == "Group / Home");
    CHECK(back.body_rows().size() == 2);

    SerializeOptions no_flatten;
    no_flatten.flatten_hierarchical = false;
    CHECK_THROWS_AS(serialize_table(t, TableLayout::Markdown, no_flatten),
                    UnsupportedLayout);
}

TEST_CASE("count_cells covers the expanded grid") {
    CHECK(count_cells(Table::from_strings({{"a", "b"}}, {{"1", "2"}})) == 4);
    CHECK(count_cells(Table::from_strings({}, {{"x"}})) == 1);

    std::vector<CellRow> body = {{Cell{"wide", 1, 2}}, {Cell{"1"}, Cell{"2"}}};
    Table spanned = Table::make({{Cell{"a", 1, 1, true}, Cell{"b", 1, 1, true}}}, body);
    CHECK(spanned.row_count() == 3);
    CHECK(spanned.column_count() == 2);
    CHECK(count_cells(spanned) == 6);
}

TEST_CASE("ragged markdown rows right-pad with empty cells") {
    Table t = parse_table("| a | b | c |\n|---|---|---|\n| 1 |", SourceFormat::Markdown);
    CHECK(t.column_count() == 3);
    CHECK(t.body_rows()[0].size() == 3);
    CHECK(t.body_rows()[0][1].text == "");
}

TEST_CASE("markdown without separator is header-less") {
    Table t = parse_table("| 1 | 2 |\n| 3 | 4 |", SourceFormat::Markdown);
    CHECK(t.header_rows().empty());
    CHECK(t.body_rows().size() == 2);
    const std::string md = serialize_table(t, TableLayout::Markdown);
    CHECK(md == "| 1 | 2 |\n| 3 | 4 |");
    CHECK(parse_table(md, SourceFormat::Markdown) == t);
}

TEST_CASE("escaped pipes survive the round trip") {
    Table t = Table::from_strings({{"a|b"}}, {{"c|d"}});
    const std::string md = serialize_table(t, TableLayout::Markdown);
    CHECK(md.find("\\|") != std::string::npos);
    CHECK(parse_table(md, SourceFormat::Markdown) == t);
}

TEST_CASE("parse errors carry the right types") {
    CHECK_THROWS_AS(parse_table("", SourceFormat::Markdown), EmptyTable);
    CHECK_THROWS_AS(parse_table("no pipes here", SourceFormat::Markdown), MalformedInput);
    CHECK_THROWS_AS(parse_table("", SourceFormat::Csv), EmptyTable);
    CHECK_THROWS_AS(parse_table("[]", SourceFormat::JsonRecords), EmptyTable);
    CHECK_THROWS_AS(parse_table("{\"a\":1}", SourceFormat::JsonRecords), MalformedInput);
    CHECK_THROWS_AS(parse_table("<div>no table</div>", SourceFormat::Html), MalformedInput);
    CHECK_THROWS_AS(parse_table("<table><tr><td>1</td></tr>", SourceFormat::Html),
                    MalformedInput);
    CHECK_THROWS_AS(
        parse_table("<table><tr><td>1</td></tr></table><table></table>", SourceFormat::Html),
        MalformedInput);
    CHECK_THROWS_AS(
        parse_table("<table><tr><td><table></table></td></tr></table>", SourceFormat::Html),
        MalformedInput);
}

TEST_CASE("hand-verified html span fixtures expand correctly") {
    for (const auto& fixture : testsupport::html_fixtures()) {
        CAPTURE(fixture.name);
        Table t = parse_table(fixture.html, SourceFormat::Html);
        CHECK(grid_texts(t) == fixture.grid);
        CHECK(t.grid().header_row_count == fixture.header_rows);
        CHECK((t.structure() == TableStructure::Hierarchical) == fixture.hierarchical);
        if (fixture.conserves_area) {
            std::size_t span_area = 0;
            for (const auto& row : t.header_rows())
                for (const auto& cell : row)
                    span_area += static_cast<std::size_t>(cell.row_span) *
                                 static_cast<std::size_t>(cell.col_span);
            for (const auto& row : t.body_rows())
                for (const auto& cell : row)
                    span_area += static_cast<std::size_t>(cell.row_span) *
                                 static_cast<std::size_t>(cell.col_span);
            CHECK(span_area == count_cells(t));
        }
    }
}

TEST_CASE("caption and entities round-trip through html serialization") {
    Table t = parse_table(
        "<table><caption>Results &amp; notes</caption><tr><th>A&amp;B</th></tr>"
        "<tr><td>&lt;x&gt;</td></tr></table>",
        SourceFormat::Html);
    REQUIRE(t.caption().has_value());
    CHECK(*t.caption() == "Results & notes");
    Table back = parse_table(serialize_table(t, TableLayout::Html), SourceFormat::Html);
    CHECK(back == t);
    CHECK(back.caption() == t.caption());
}

TEST_CASE("plain rows layout joins the expanded grid") {
    std::vector<CellRow> body = {{Cell{"wide", 1, 2}}, {Cell{"1"}, Cell{"2"}}};
    Table t = Table::make({{Cell{"a", 1, 1, true}, Cell{"b", 1, 1, true}}}, body);
    CHECK(serialize_table(t, TableLayout::PlainRows) ==
          "a | b\nwide | wide\n1 | 2");
}

TEST_CASE("structure classification ignores body spans") {
    std::vector<CellRow> body = {{Cell{"m", 2, 1}, Cell{"1"}}, {Cell{"2"}}};
    Table t = Table::make({{Cell{"h1", 1, 1, true}, Cell{"h2", 1, 1, true}}}, body);
    CHECK(t.structure() == TableStructure::Flat);
}

TEST_CASE("native json schema round-trips tables with spans") {
    std::vector<CellRow> header = {
        {Cell{"Group", 1, 2, true}, Cell{"Season", 2, 1, true}},
        {Cell{"Home", 1, 1, true}, Cell{"Away", 1, 1, true}},
    };
    std::vector<CellRow> body = {{Cell{"3"}, Cell{"1"}, Cell{"2021"}}};
    Table t = Table::make(header, body, "caption here");
    Table back = table_from_json(table_to_json(t));
    CHECK(back == t);
    CHECK(back.caption() == t.caption());

    Table again = parse_table(table_to_json(t).dump(), SourceFormat::Native);
    CHECK(again == t);
}

TEST_CASE("property: markdown round trip on random flat tables") {
    std::mt19937 rng(20250809);
    for (int trial = 0; trial < 100; ++trial) {
        Table t = testsupport::random_flat_table(rng);
        const std::string md = serialize_table(t, TableLayout::Markdown);
        Table back = parse_table(md, SourceFormat::Markdown);
        REQUIRE(back == t);
    }
}

TEST_CASE("property: html round trip on random flat tables") {
    std::mt19937 rng(987654);
    for (int trial = 0; trial < 50; ++trial) {
        Table t = testsupport::random_flat_table(rng);
        Table back = parse_table(serialize_table(t, TableLayout::Html), SourceFormat::Html);
        REQUIRE(back == t);
    }
}

TEST_CASE("corpus jsonl round-trips instances and rejects duplicates") {
    testsupport::TempDir dir("corpus");
    QAInstance inst = testsupport::make_instance(
        "wtq-1", "WTQ", "what is b?", Table::from_strings({{"a", "b"}}, {{"1", "2"}}),
        {"2"});
    inst.question_type = QuestionType::Retrieval;
    inst.size_class = SizeClass::Small;
    inst.metadata["k"] = "v";

    const std::string path = dir.file("corpus.jsonl");
    write_corpus({inst}, path);
    auto loaded = read_corpus(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].id == inst.id);
    CHECK(loaded[0].table == inst.table);
    CHECK(loaded[0].question_type == QuestionType::Retrieval);
    CHECK(loaded[0].metadata.at("k") == "v");

    const std::string doubled = corpus_to_jsonl({inst}) + corpus_to_jsonl({inst});
    CHECK_THROWS_AS(parse_corpus(doubled), MalformedInput);

    QAInstance no_gold = inst;
    no_gold.id = "wtq-2";
    no_gold.gold_answers.clear();
    CHECK_THROWS_AS(parse_corpus(corpus_to_jsonl({no_gold})), MalformedInput);
}
