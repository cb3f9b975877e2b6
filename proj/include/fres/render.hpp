#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fres/size.hpp"
#include "fres/table.hpp"

namespace fres {

// The four visual table templates, plus color encoding and font size.
enum class TemplateId { Borderless, FullBorders, PartialBorders, WideSpacing };

struct RenderTemplate {
    TemplateId id = TemplateId::FullBorders;
    // palette[0] = header background, palette[1] = odd row stripe; further
    // entries are ignored today. Must be non-empty.
    std::vector<std::string> palette = {"#dbe8f4", "#f3f6fa"};
    int font_size = 14;  // points
};

const char* to_string(TemplateId id);
TemplateId template_id_from_string(std::string_view s);

// Uniform draw over the four template ids with default palettes, seeded.
RenderTemplate pick_template(std::uint64_t seed, std::uint64_t index);

// Emits a complete HTML document containing exactly one table element,
// styled per the template. Deterministic; parsing the emission recovers
// the cell grid.
std::string render_html(const Table& table, const RenderTemplate& render_template);

// Content rectangle once margins are cropped away, per the layout model.
struct CropBox {
    long width = 0;
    long height = 0;
    bool degenerate = false;  // zero-area content

    long area() const { return width * height; }
};

// From a width/height estimate produced by the layout model.
CropBox crop_box(long estimated_width, long estimated_height,
                 const LayoutGeometry& geometry = {});
CropBox crop_box(const Table& table, const LayoutGeometry& geometry = {});

}  // namespace fres
