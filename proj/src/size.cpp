#include "fres/size.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>

namespace fres {

long count_tokens(std::string_view text) {
    long count = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

namespace {

std::size_t cell_char_count(const std::string& text) {
    // Count UTF-8 code points, not bytes, so non-ASCII cells are not
    // double-width in the layout model.
    std::size_t n = 0;
    for (unsigned char c : text)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

}  // namespace

long estimate_width(const Table& table, const LayoutGeometry& geometry) {
    const ExpandedGrid& grid = table.grid();
    long width = geometry.margin;
    for (std::size_t c = 0; c < grid.cols(); ++c) {
        std::size_t max_chars = 0;
        for (std::size_t r = 0; r < grid.rows(); ++r)
            max_chars = std::max(max_chars, cell_char_count(grid.cells[r][c].text));
        width += 2L * geometry.cell_pad + static_cast<long>(geometry.char_width) *
                                              static_cast<long>(max_chars);
    }
    return width;
}

long estimate_height(const Table& table, const LayoutGeometry& geometry) {
    return geometry.margin +
           static_cast<long>(geometry.row_height) * static_cast<long>(table.row_count());
}

double estimate_pixels(const Table& table, const LayoutGeometry& geometry) {
    return static_cast<double>(estimate_width(table, geometry)) *
           static_cast<double>(estimate_height(table, geometry));
}

SizeClass classify_size(long token_count, double pixel_area,
                        const SizeThresholds& thresholds, SizeRule rule) {
    const bool token_small = token_count < thresholds.token_threshold;
    const bool pixel_small = pixel_area < thresholds.pixel_threshold;
    if (rule == SizeRule::Fres)
        return (token_small && pixel_small) ? SizeClass::Small : SizeClass::Big;
    if (token_small && pixel_small) return SizeClass::Small;
    if (!token_small && !pixel_small) return SizeClass::Big;
    return SizeClass::Excluded;
}

SizeEstimate estimate_size(const Table& table, const EstimateOptions& options,
                           std::optional<std::pair<long, long>> measured_wh) {
    SizeEstimate est;
    est.token_count = count_tokens(serialize_table(table, options.serialization_layout,
                                                   options.serialize_options));
    if (measured_wh) {
        est.pixel_source = PixelSource::MeasuredImage;
        est.pixel_area = static_cast<double>(measured_wh->first) *
                         static_cast<double>(measured_wh->second);
    } else {
        est.pixel_source = PixelSource::LayoutModel;
        est.pixel_area = estimate_pixels(table, options.geometry);
    }
    est.cell_count = static_cast<long>(count_cells(table));
    est.classification_benchmark =
        classify_size(est.token_count, est.pixel_area, options.thresholds, SizeRule::Benchmark);
    est.classification_fres =
        classify_size(est.token_count, est.pixel_area, options.thresholds, SizeRule::Fres);
    return est;
}

std::optional<std::pair<long, long>> read_png_dimensions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::array<unsigned char, 24> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (in.gcount() < static_cast<std::streamsize>(buf.size())) return std::nullopt;
    static const std::array<unsigned char, 8> signature = {0x89, 'P', 'N', 'G',
                                                           '\r', '\n', 0x1A, '\n'};
    for (std::size_t i = 0; i < signature.size(); ++i)
        if (buf[i] != signature[i]) return std::nullopt;
    // IHDR is always first: length(4) type(4) then width/height big-endian.
    const auto be32 = [&buf](std::size_t off) {
        return (static_cast<long>(buf[off]) << 24) | (static_cast<long>(buf[off + 1]) << 16) |
               (static_cast<long>(buf[off + 2]) << 8) | static_cast<long>(buf[off + 3]);
    };
    if (!(buf[12] == 'I' && buf[13] == 'H' && buf[14] == 'D' && buf[15] == 'R'))
        return std::nullopt;
    long width = be32(16);
    long height = be32(20);
    if (width <= 0 || height <= 0) return std::nullopt;
    return std::make_pair(width, height);
}

SizeEstimate estimate_instance(const QAInstance& instance, const EstimateOptions& options) {
    std::optional<std::pair<long, long>> measured;
    auto wit = instance.metadata.find("image_width");
    auto hit = instance.metadata.find("image_height");
    if (wit != instance.metadata.end() && hit != instance.metadata.end()) {
        try {
            long w = std::stol(wit->second);
            long h = std::stol(hit->second);
            if (w > 0 && h > 0) measured = std::make_pair(w, h);
        } catch (const std::exception&) {
            // fall through to other sources
        }
    }
    if (!measured && instance.image_ref)
        measured = read_png_dimensions(*instance.image_ref);
    return estimate_size(instance.table, options, measured);
}

nlohmann::ordered_json size_estimate_to_json(const SizeEstimate& estimate) {
    nlohmann::ordered_json j;
    j["token_count"] = estimate.token_count;
    j["pixel_area"] = estimate.pixel_area;
    j["pixel_source"] = estimate.pixel_source == PixelSource::MeasuredImage
                            ? "measured_image"
                            : "layout_model";
    j["cell_count"] = estimate.cell_count;
    j["classification_benchmark"] = to_string(estimate.classification_benchmark);
    j["classification_fres"] = to_string(estimate.classification_fres);
    return j;
}

}  // namespace fres
