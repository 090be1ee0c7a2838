#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "osmosis/discretize.hpp"
#include "osmosis/errors.hpp"
#include "osmosis/io.hpp"

namespace osmosis {

namespace {

using nlohmann::json;

json parse_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("malformed document " + path + ": " + e.what());
    }
}

Rect rect_from(const json& j, const std::string& path) {
    try {
        return Rect{j.at("x").get<int>(), j.at("y").get<int>(),
                    j.at("width").get<int>(), j.at("height").get<int>()};
    } catch (const json::exception& e) {
        throw IoError("malformed rectangle in " + path + ": " + e.what());
    }
}

bool looks_like_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    unsigned char m[2] = {0, 0};
    in.read(reinterpret_cast<char*>(m), 2);
    if (in.gcount() != 2) return false;
    return (m[0] == 0x89 && m[1] == 'P') ||
           (m[0] == 'P' && (m[1] == '5' || m[1] == '6')) ||
           (m[0] == 'I' && m[1] == 'I') || (m[0] == 'M' && m[1] == 'M');
}

void check_step_order(const std::vector<MetricsRow>& rows, const std::string& context) {
    std::map<int, long long> last;
    for (const MetricsRow& row : rows) {
        auto [it, fresh] = last.emplace(row.channel, row.step);
        if (!fresh) {
            if (row.step <= it->second)
                throw ValidationError("metrics steps not strictly increasing on channel " +
                                      std::to_string(row.channel) + " at step " +
                                      std::to_string(row.step) + " (" + context + ")");
            it->second = row.step;
        }
    }
}

constexpr const char* kMetricsHeader = "step,channel,mean,sup_change,wall_ms";

}  // namespace

TilingSpec load_tiling(const std::string& path) {
    const json doc = parse_document(path);
    TilingSpec spec;
    try {
        const json& canvas = doc.at("canvas");
        spec.canvas_width = canvas.at("width").get<int>();
        spec.canvas_height = canvas.at("height").get<int>();
        if (!doc.at("tiles").is_array())
            throw IoError("tiles must be an array in " + path);
        for (const json& t : doc.at("tiles"))
            spec.tiles.push_back(rect_from(t, path));
    } catch (const json::exception& e) {
        throw IoError("malformed tiling document " + path + ": " + e.what());
    }
    if (spec.canvas_width <= 0 || spec.canvas_height <= 0)
        throw ValidationError("tiling canvas must be positive, got " +
                              std::to_string(spec.canvas_width) + "x" +
                              std::to_string(spec.canvas_height));
    tile_index_map(spec.tiles, spec.canvas_width, spec.canvas_height);
    return spec;
}

RegionPartition load_partition(const std::string& path) {
    if (looks_like_image(path)) {
        const Image raster = load_image(path);
        if (raster.channels() != 1)
            throw ValidationError("partition raster must be single-channel: " + path);
        auto src = raster.channel(0);
        std::vector<std::uint8_t> labels(src.size());
        for (std::size_t k = 0; k < src.size(); ++k) {
            if (src[k] != 1.0 && src[k] != 2.0 && src[k] != 3.0)
                throw ValidationError("partition raster sample " + std::to_string(k) +
                                      " is not a region label (1, 2, or 3)");
            labels[k] = static_cast<std::uint8_t>(src[k]);
        }
        return RegionPartition::from_labels(raster.width(), raster.height(),
                                            std::move(labels));
    }

    const json doc = parse_document(path);
    int width = 0, height = 0, band = 2;
    Rect omega2;
    try {
        const json& canvas = doc.at("canvas");
        width = canvas.at("width").get<int>();
        height = canvas.at("height").get<int>();
        omega2 = rect_from(doc.at("omega2"), path);
        if (doc.contains("band")) band = doc.at("band").get<int>();
    } catch (const json::exception& e) {
        throw IoError("malformed partition document " + path + ": " + e.what());
    }
    return RegionPartition::from_interior_rect(width, height, omega2, band);
}

void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
    check_step_order(rows, "writing " + path);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << kMetricsHeader << "\n";
    char buf[160];
    for (const MetricsRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%lld,%d,%.17g,%.17g,%.17g\n",
                      row.step, row.channel, row.mean, row.sup_change, row.wall_ms);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader)
        throw IoError("bad metrics header in " + path + ": expected \"" +
                      kMetricsHeader + "\"");
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MetricsRow row;
        if (std::sscanf(line.c_str(), "%lld,%d,%lf,%lf,%lf", &row.step, &row.channel,
                        &row.mean, &row.sup_change, &row.wall_ms) != 5)
            throw IoError("malformed metrics row in " + path + ": " + line);
        rows.push_back(row);
    }
    check_step_order(rows, "reading " + path);
    return rows;
}

}  // namespace osmosis
