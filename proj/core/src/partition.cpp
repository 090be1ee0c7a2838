#include "osmosis/partition.hpp"

#include <algorithm>
#include <string>

#include "osmosis/errors.hpp"

namespace osmosis {

namespace {

void check_separation(int width, int height, const std::vector<std::uint8_t>& labels) {
    auto at = [&](int i, int j) { return labels[static_cast<std::size_t>(j) * width + i]; };
    for (int j = 0; j < height; ++j) {
        for (int i = 0; i < width; ++i) {
            const std::uint8_t a = at(i, j);
            if (i + 1 < width) {
                const std::uint8_t b = at(i + 1, j);
                if ((a == 1 && b == 2) || (a == 2 && b == 1))
                    throw ValidationError("exterior/interior labels touch at pixels (" +
                                          std::to_string(i) + "," + std::to_string(j) + ") and (" +
                                          std::to_string(i + 1) + "," + std::to_string(j) + ")");
            }
            if (j + 1 < height) {
                const std::uint8_t b = at(i, j + 1);
                if ((a == 1 && b == 2) || (a == 2 && b == 1))
                    throw ValidationError("exterior/interior labels touch at pixels (" +
                                          std::to_string(i) + "," + std::to_string(j) + ") and (" +
                                          std::to_string(i) + "," + std::to_string(j + 1) + ")");
            }
        }
    }
}

}  // namespace

RegionPartition RegionPartition::from_interior_rect(int width, int height,
                                                    const Rect& omega2, int band) {
    if (width < 1 || height < 1)
        throw ValidationError("partition canvas must be at least 1x1");
    if (omega2.empty())
        throw ValidationError("interior rectangle " + to_string(omega2) + " is empty");
    if (omega2.x < 0 || omega2.y < 0 || omega2.x + omega2.width > width ||
        omega2.y + omega2.height > height)
        throw ValidationError("interior rectangle " + to_string(omega2) +
                              " exceeds canvas " + std::to_string(width) + "x" +
                              std::to_string(height));
    if (band < 1)
        throw ValidationError("overlap band width must be at least 1, got " +
                              std::to_string(band));

    const Rect grown{omega2.x - band, omega2.y - band,
                     omega2.width + 2 * band, omega2.height + 2 * band};
    RegionPartition p;
    p.width_ = width;
    p.height_ = height;
    p.labels_.resize(static_cast<std::size_t>(width) * height);
    for (int j = 0; j < height; ++j) {
        for (int i = 0; i < width; ++i) {
            std::uint8_t label = exterior;
            if (omega2.contains(i, j))
                label = interior;
            else if (grown.contains(i, j))
                label = overlap;
            p.labels_[static_cast<std::size_t>(j) * width + i] = label;
        }
    }
    return p;
}

RegionPartition RegionPartition::from_labels(int width, int height,
                                             std::vector<std::uint8_t> labels) {
    if (width < 1 || height < 1)
        throw ValidationError("partition canvas must be at least 1x1");
    const std::size_t expected = static_cast<std::size_t>(width) * height;
    if (labels.size() != expected)
        throw ValidationError("label raster holds " + std::to_string(labels.size()) +
                              " entries, expected " + std::to_string(expected));
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (labels[k] < 1 || labels[k] > 3)
            throw ValidationError("label " + std::to_string(labels[k]) +
                                  " at flat index " + std::to_string(k) +
                                  " is outside {1,2,3}");
    check_separation(width, height, labels);
    RegionPartition p;
    p.width_ = width;
    p.height_ = height;
    p.labels_ = std::move(labels);
    return p;
}

long long RegionPartition::count(std::uint8_t value) const {
    return std::count(labels_.begin(), labels_.end(), value);
}

}  // namespace osmosis
