#ifndef OSMOSIS_PARTITION_HPP
#define OSMOSIS_PARTITION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "osmosis/rect.hpp"

namespace osmosis {

/// Pixel labelling into exterior (1), interior (2) and an overlap
/// frame (3) that separates them: no 4-adjacent pixel pair may carry
/// labels {1, 2}. Used to composite two modalities before fusion.
class RegionPartition {
public:
    static constexpr std::uint8_t exterior = 1;
    static constexpr std::uint8_t interior = 2;
    static constexpr std::uint8_t overlap = 3;

    RegionPartition() = default;

    /// Builds the partition from the interior rectangle: label 2 inside
    /// omega2, label 3 on a band of the given width around it, label 1
    /// elsewhere. band >= 1 keeps the separation invariant.
    static RegionPartition from_interior_rect(int width, int height,
                                              const Rect& omega2, int band = 2);

    /// Adopts an explicit label raster; validates values and separation.
    static RegionPartition from_labels(int width, int height,
                                       std::vector<std::uint8_t> labels);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint8_t label(int col, int row) const {
        return labels_[static_cast<std::size_t>(row) * width_ + col];
    }
    std::span<const std::uint8_t> labels() const { return labels_; }

    long long count(std::uint8_t value) const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> labels_;
};

}  // namespace osmosis

#endif  // OSMOSIS_PARTITION_HPP
