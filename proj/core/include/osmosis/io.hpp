#pragma once

#include <string>
#include <vector>

#include "osmosis/image.hpp"
#include "osmosis/partition.hpp"
#include "osmosis/rect.hpp"

namespace osmosis {

/// Mosaic tiling: a list of rectangles covering the canvas exactly.
struct TilingSpec {
    int canvas_width = 0;
    int canvas_height = 0;
    std::vector<Rect> tiles;
};

/// One per-step metrics record as written to CSV.
struct MetricsRow {
    long long step = 0;
    int channel = 0;
    double mean = 0.0;
    double sup_change = 0.0;
    double wall_ms = 0.0;
};

/// Decodes PNG, binary PGM/PPM, or uncompressed single-strip grayscale
/// TIFF, dispatching on the file's magic bytes. 16-bit samples are read
/// big-endian for PNG/PNM and per the header byte order for TIFF. If a
/// "<path>.scale.txt" sidecar exists, samples are divided by its factor
/// and the image is marked as float pipeline data.
Image load_image(const std::string& path);

/// Encodes by file extension: .png (gray/RGB, 8 or 16 bit), .pgm (P5,
/// single channel), .ppm (P6, three channels). Integer-depth images are
/// stored as is after clamping to their range. Float pipeline images
/// (bit_depth 0) are scaled to fill the 16-bit range and the factor is
/// written to "<path>.scale.txt" so values remain recoverable.
void save_image(const Image& img, const std::string& path);

/// Loads a tiling document and validates that the rectangles tile the
/// declared canvas exactly.
TilingSpec load_tiling(const std::string& path);

/// Loads a region partition, either from a label raster (image file
/// with samples 1, 2, 3) or from a document giving the interior
/// rectangle and the overlap band width.
RegionPartition load_partition(const std::string& path);

/// Writes rows as CSV with header "step,channel,mean,sup_change,wall_ms".
/// Steps must be strictly increasing per channel.
void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows);

/// Parses a metrics CSV back; validates the header and step ordering.
std::vector<MetricsRow> read_metrics(const std::string& path);

}  // namespace osmosis
