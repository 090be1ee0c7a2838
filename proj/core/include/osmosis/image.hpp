#ifndef OSMOSIS_IMAGE_HPP
#define OSMOSIS_IMAGE_HPP

#include <span>
#include <vector>

#include "osmosis/rect.hpp"

namespace osmosis {

/// Positive-valued scalar grid with one or more channels.
///
/// Samples are stored channel-planar, row-major within a channel:
/// sample(c, row, col) lives at c*width*height + row*width + col.
/// The evolution treats channels independently, so every numerical
/// routine below operates on single-channel images or channel spans.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels = 1, double fill = 0.0);

    /// Takes ownership of a sample buffer; rejects wrong sizes and
    /// non-finite samples (the offending index is named).
    static Image from_samples(int width, int height, int channels,
                              std::vector<double> samples);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    long long pixel_count() const { return 1LL * width_ * height_; }

    /// Grid spacing h of the underlying discretisation (default 1).
    double spacing() const { return spacing_; }
    void set_spacing(double h);

    /// Bit depth of the file the image came from: 8 or 16, or 0 for
    /// values born in the floating-point pipeline.
    int bit_depth() const { return bit_depth_; }
    void set_bit_depth(int depth);

    double at(int channel, int row, int col) const {
        return samples_[index(channel, row, col)];
    }
    double& at(int channel, int row, int col) {
        return samples_[index(channel, row, col)];
    }

    std::span<const double> channel(int c) const;
    std::span<double> channel(int c);
    std::span<const double> samples() const { return samples_; }
    std::span<double> samples() { return samples_; }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_ &&
               channels_ == other.channels_;
    }

private:
    std::size_t index(int channel, int row, int col) const {
        return (static_cast<std::size_t>(channel) * height_ + row) * width_ + col;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    int bit_depth_ = 0;
    double spacing_ = 1.0;
    std::vector<double> samples_;
};

/// Clamps every sample to at least floor_value (> 0), leaving metadata
/// untouched. Idempotent. Rejects non-finite samples.
Image ensure_positive(const Image& img, double floor_value);

/// Default positivity floor: 1 for images loaded from 8/16-bit files,
/// 1/255 for floating-point pipeline values.
double default_positivity_floor(const Image& img);

/// Arithmetic mean of one channel.
double mean(const Image& img, int channel);

/// Arithmetic mean of one channel restricted to a pixel rectangle.
double mean(const Image& img, int channel, const Rect& region);

/// Copies one channel into a fresh single-channel image (spacing and
/// bit depth carried over).
Image extract_channel(const Image& img, int channel);

/// Writes a single-channel image into channel c of dst (shapes must agree).
void insert_channel(Image& dst, int channel, const Image& src);

}  // namespace osmosis

#endif  // OSMOSIS_IMAGE_HPP
