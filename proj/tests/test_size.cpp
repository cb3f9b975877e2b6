#include <doctest.h>

#include <random>

#include "fres/size.hpp"
#include "support.hpp"

using namespace fres;

TEST_CASE("count_tokens counts maximal non-whitespace runs") {
    CHECK(count_tokens("a b  c") == 3);
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("   ") == 0);
    CHECK(count_tokens("one\ttwo\nthree") == 3);
    // the canonical 2x2 markdown serialization, counted by hand
    CHECK(count_tokens("| a | b |\n|---|---|\n| 1 | 2 |") == 11);
}

TEST_CASE("layout model matches the stated formula on the 1x1 fixture") {
    Table t = Table::from_strings({}, {{"x"}});
    LayoutGeometry geometry;  // char_width 8, cell_pad 10, row_height 30, margin 20
    CHECK(estimate_width(t, geometry) == 48);
    CHECK(estimate_height(t, geometry) == 50);
    CHECK(estimate_pixels(t, geometry) == doctest::Approx(2400.0));
}

TEST_CASE("empty-text table width depends only on padding and margin") {
    Table t = Table::from_strings({{"", ""}}, {{"", ""}});
    LayoutGeometry geometry;
    CHECK(estimate_width(t, geometry) == 20 + 2 * (2 * 10));
    CHECK(estimate_height(t, geometry) == 20 + 2 * 30);
}

TEST_CASE("doubling cell text never decreases the pixel estimate") {
    std::mt19937 rng(4242);
    for (int trial = 0; trial < 30; ++trial) {
        Table t = testsupport::random_flat_table(rng);
        std::vector<std::vector<std::string>> header, body;
        for (const auto& row : t.header_rows()) {
            std::vector<std::string> r;
            for (const auto& cell : row) r.push_back(cell.text + cell.text);
            header.push_back(std::move(r));
        }
        for (const auto& row : t.body_rows()) {
            std::vector<std::string> r;
            for (const auto& cell : row) r.push_back(cell.text + cell.text);
            body.push_back(std::move(r));
        }
        Table doubled = Table::from_strings(header, body);
        CHECK(estimate_pixels(doubled) >= estimate_pixels(t));
    }
}

TEST_CASE("classify_size follows both rules") {
    SizeThresholds thresholds;  // 2e6 pixels, 288 tokens

    SUBCASE("both strictly below: small in both modes") {
        CHECK(classify_size(100, 1e5, thresholds, SizeRule::Benchmark) == SizeClass::Small);
        CHECK(classify_size(100, 1e5, thresholds, SizeRule::Fres) == SizeClass::Small);
    }
    SUBCASE("token above only: excluded vs fres-big") {
        CHECK(classify_size(300, 1e6, thresholds, SizeRule::Benchmark) ==
              SizeClass::Excluded);
        CHECK(classify_size(300, 1e6, thresholds, SizeRule::Fres) == SizeClass::Big);
    }
    SUBCASE("both above: big in both modes") {
        CHECK(classify_size(500, 5e6, thresholds, SizeRule::Benchmark) == SizeClass::Big);
        CHECK(classify_size(500, 5e6, thresholds, SizeRule::Fres) == SizeClass::Big);
    }
    SUBCASE("values exactly at the thresholds sit on the big side") {
        CHECK(classify_size(288, 2e6, thresholds, SizeRule::Benchmark) == SizeClass::Big);
        CHECK(classify_size(288, 2e6, thresholds, SizeRule::Fres) == SizeClass::Big);
        CHECK(classify_size(288, 1e5, thresholds, SizeRule::Fres) == SizeClass::Big);
        CHECK(classify_size(100, 2e6, thresholds, SizeRule::Fres) == SizeClass::Big);
        CHECK(classify_size(287, 2e6 - 1, thresholds, SizeRule::Benchmark) ==
              SizeClass::Small);
    }
}

TEST_CASE("property: rule containment and fres monotonicity") {
    SizeThresholds thresholds;
    std::mt19937 rng(1337);
    std::uniform_int_distribution<long> token_dist(0, 600);
    std::uniform_real_distribution<double> pixel_dist(0, 4e6);
    for (int trial = 0; trial < 300; ++trial) {
        const long tokens = token_dist(rng);
        const double pixels = pixel_dist(rng);
        const SizeClass bench = classify_size(tokens, pixels, thresholds, SizeRule::Benchmark);
        const SizeClass fres_class = classify_size(tokens, pixels, thresholds, SizeRule::Fres);
        if (fres_class == SizeClass::Small)
            CHECK(bench == SizeClass::Small);  // fres-small implies benchmark-small
        if (bench == SizeClass::Big) CHECK(fres_class == SizeClass::Big);
        // growing either measure never flips fres big -> small
        if (fres_class == SizeClass::Big) {
            CHECK(classify_size(tokens + 50, pixels, thresholds, SizeRule::Fres) ==
                  SizeClass::Big);
            CHECK(classify_size(tokens, pixels * 2, thresholds, SizeRule::Fres) ==
                  SizeClass::Big);
        }
    }
}

TEST_CASE("estimate_size classifies and counts") {
    Table t = Table::from_strings({{"a", "b"}}, {{"1", "2"}});
    SizeEstimate est = estimate_size(t);
    CHECK(est.token_count == 11);
    CHECK(est.cell_count == 4);
    CHECK(est.pixel_source == PixelSource::LayoutModel);
    CHECK(est.classification_benchmark == SizeClass::Small);
    CHECK(est.classification_fres == SizeClass::Small);
    CHECK(est.token_count >= 1);  // non-empty table

    SizeEstimate measured = estimate_size(t, {}, std::make_pair(2000L, 1500L));
    CHECK(measured.pixel_source == PixelSource::MeasuredImage);
    CHECK(measured.pixel_area == doctest::Approx(3e6));
    CHECK(measured.classification_fres == SizeClass::Big);
    CHECK(measured.classification_benchmark == SizeClass::Excluded);
}

TEST_CASE("measured image dimensions override the layout model per instance") {
    testsupport::TempDir dir("size");
    QAInstance inst = testsupport::make_instance(
        "i1", "WTQ", "q", Table::from_strings({{"a"}}, {{"1"}}), {"1"});

    SUBCASE("metadata dimensions win") {
        inst.metadata["image_width"] = "1000";
        inst.metadata["image_height"] = "3000";
        SizeEstimate est = estimate_instance(inst);
        CHECK(est.pixel_source == PixelSource::MeasuredImage);
        CHECK(est.pixel_area == doctest::Approx(3e6));
    }
    SUBCASE("png header dimensions are read from image_ref") {
        const std::string png = dir.write("img.png", testsupport::png_bytes(640, 480));
        inst.image_ref = png;
        SizeEstimate est = estimate_instance(inst);
        CHECK(est.pixel_source == PixelSource::MeasuredImage);
        CHECK(est.pixel_area == doctest::Approx(640.0 * 480.0));
    }
    SUBCASE("unreadable image falls back to the layout model") {
        inst.image_ref = dir.file("missing.png");
        SizeEstimate est = estimate_instance(inst);
        CHECK(est.pixel_source == PixelSource::LayoutModel);
    }
    SUBCASE("non-png bytes fall back to the layout model") {
        inst.image_ref = dir.write("img.png", "not a png at all, just text");
        SizeEstimate est = estimate_instance(inst);
        CHECK(est.pixel_source == PixelSource::LayoutModel);
    }
}

TEST_CASE("token counting runs on the configured serialization") {
    std::vector<CellRow> header = {
        {Cell{"Group", 1, 2, true}, Cell{"Season", 2, 1, true}},
        {Cell{"Home", 1, 1, true}, Cell{"Away", 1, 1, true}},
    };
    Table t = Table::make(header, {{Cell{"3"}, Cell{"1"}, Cell{"2021"}}});
    EstimateOptions md_options;
    EstimateOptions plain_options;
    plain_options.serialization_layout = TableLayout::PlainRows;
    const SizeEstimate md = estimate_size(t, md_options);
    const SizeEstimate plain = estimate_size(t, plain_options);
    CHECK(md.token_count != plain.token_count);
    CHECK(md.token_count == count_tokens(serialize_table(t, TableLayout::Markdown)));
}
