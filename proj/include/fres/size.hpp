#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fres/corpus.hpp"
#include "fres/table.hpp"

namespace fres {

// Defaults are the corpus-wide averages the size rules are anchored to:
// 2e6 pixels (width x height) and 288 whitespace tokens.
struct SizeThresholds {
    double pixel_threshold = 2e6;
    long token_threshold = 288;
};

// Constants of the layout model used when no rendered image exists.
// Approximate default HTML table rendering; all configurable.
struct LayoutGeometry {
    int char_width = 8;
    int cell_pad = 10;
    int row_height = 30;
    int margin = 20;
};

// Which size rule to apply: the benchmark rule needs both measures on the
// same side (otherwise Excluded); the routing rule calls a table big as
// soon as either measure reaches its threshold.
enum class SizeRule { Benchmark, Fres };

enum class PixelSource { MeasuredImage, LayoutModel };

struct SizeEstimate {
    long token_count = 0;
    double pixel_area = 0;
    PixelSource pixel_source = PixelSource::LayoutModel;
    long cell_count = 0;
    SizeClass classification_benchmark = SizeClass::Excluded;
    SizeClass classification_fres = SizeClass::Small;  // never Excluded
};

// Number of maximal non-whitespace runs.
long count_tokens(std::string_view text);

// Layout model: width = margin + sum over columns of
// (2*cell_pad + char_width*max_chars_in_column), height = margin +
// row_height*expanded_row_count. Returns width*height.
double estimate_pixels(const Table& table, const LayoutGeometry& geometry = {});
long estimate_width(const Table& table, const LayoutGeometry& geometry = {});
long estimate_height(const Table& table, const LayoutGeometry& geometry = {});

// Boundary convention: a value exactly equal to its threshold counts as
// not-smaller, i.e. on the Big side under both rules.
SizeClass classify_size(long token_count, double pixel_area,
                        const SizeThresholds& thresholds, SizeRule rule);

struct EstimateOptions {
    TableLayout serialization_layout = TableLayout::Markdown;
    SerializeOptions serialize_options = {};
    LayoutGeometry geometry = {};
    SizeThresholds thresholds = {};
};

// Full estimate for a table. When measured image dimensions are supplied
// they override the layout model and pixel_source records it.
SizeEstimate estimate_size(const Table& table, const EstimateOptions& options = {},
                           std::optional<std::pair<long, long>> measured_wh = std::nullopt);

// Estimate for a corpus instance. Measured dimensions are taken from
// metadata keys "image_width"/"image_height", else from the PNG header of
// image_ref when the file is readable, else the layout model applies.
SizeEstimate estimate_instance(const QAInstance& instance,
                               const EstimateOptions& options = {});

// Reads width/height from a PNG IHDR header. Returns nullopt when the file
// is missing or not a PNG.
std::optional<std::pair<long, long>> read_png_dimensions(const std::string& path);

nlohmann::ordered_json size_estimate_to_json(const SizeEstimate& estimate);

}  // namespace fres
