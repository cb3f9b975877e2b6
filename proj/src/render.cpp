#include "fres/render.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace fres {

const char* to_string(TemplateId id) {
    switch (id) {
        case TemplateId::Borderless: return "borderless";
        case TemplateId::FullBorders: return "full_borders";
        case TemplateId::PartialBorders: return "partial_borders";
        case TemplateId::WideSpacing: return "wide_spacing";
    }
    return "full_borders";
}

TemplateId template_id_from_string(std::string_view s) {
    if (s == "borderless") return TemplateId::Borderless;
    if (s == "full_borders") return TemplateId::FullBorders;
    if (s == "partial_borders") return TemplateId::PartialBorders;
    if (s == "wide_spacing") return TemplateId::WideSpacing;
    throw ConfigError("unknown render template: " + std::string(s));
}

namespace {

struct Palette {
    const char* header;
    const char* stripe;
};

constexpr Palette kPalettes[] = {
    {"#dbe8f4", "#f3f6fa"},
    {"#e8f4db", "#f6faf3"},
    {"#f4e4db", "#faf5f3"},
};

}  // namespace

RenderTemplate pick_template(std::uint64_t seed, std::uint64_t index) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    std::uniform_int_distribution<int> template_dist(0, 3);
    std::uniform_int_distribution<int> palette_dist(0, 2);
    RenderTemplate t;
    t.id = static_cast<TemplateId>(template_dist(rng));
    const Palette& p = kPalettes[palette_dist(rng)];
    t.palette = {p.header, p.stripe};
    return t;
}

namespace {

std::string template_css(const RenderTemplate& t) {
    const std::string& header_bg = t.palette.front();
    const std::string stripe_bg = t.palette.size() > 1 ? t.palette[1] : t.palette.front();
    std::ostringstream css;
    css << "body { margin: 10px; }\n";
    css << "table { font-family: Arial, Helvetica, sans-serif; font-size: "
        << t.font_size << "pt; }\n";
    switch (t.id) {
        case TemplateId::Borderless:
            // DataFrame-like: plain cells, header emphasis only.
            css << "th, td { padding: 4px 10px; text-align: left; }\n"
                << "th { background: " << header_bg << "; font-weight: bold; }\n"
                << "tr:nth-child(even) td { background: " << stripe_bg << "; }\n";
            break;
        case TemplateId::FullBorders:
            css << "table { border-collapse: collapse; }\n"
                << "th, td { border: 1px solid #444444; padding: 5px 9px; }\n"
                << "th { background: " << header_bg << "; }\n";
            break;
        case TemplateId::PartialBorders:
            css << "table { border-collapse: collapse; }\n"
                << "th { border-bottom: 2px solid #333333; background: " << header_bg
                << "; padding: 4px 10px; }\n"
                << "td { border-bottom: 1px solid #bbbbbb; padding: 4px 10px; }\n";
            break;
        case TemplateId::WideSpacing:
            css << "table { border-spacing: 14px 6px; }\n"
                << "th, td { padding: 10px 22px; }\n"
                << "th { background: " << header_bg << "; }\n"
                << "tr:nth-child(even) td { background: " << stripe_bg << "; }\n";
            break;
    }
    return css.str();
}

}  // namespace

std::string render_html(const Table& table, const RenderTemplate& render_template) {
    if (render_template.palette.empty())
        throw ConfigError("render template palette must not be empty");
    std::ostringstream os;
    os << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<style>\n"
       << template_css(render_template) << "</style>\n</head>\n<body>\n"
       << serialize_table(table, TableLayout::Html) << "\n</body>\n</html>\n";
    return os.str();
}

CropBox crop_box(long estimated_width, long estimated_height,
                 const LayoutGeometry& geometry) {
    CropBox box;
    box.width = std::max(0L, estimated_width - geometry.margin);
    box.height = std::max(0L, estimated_height - geometry.margin);
    box.degenerate = box.width == 0 || box.height == 0;
    return box;
}

CropBox crop_box(const Table& table, const LayoutGeometry& geometry) {
    return crop_box(estimate_width(table, geometry), estimate_height(table, geometry),
                    geometry);
}

}  // namespace fres
