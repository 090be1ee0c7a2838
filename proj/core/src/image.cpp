#include "osmosis/image.hpp"

#include <cmath>
#include <string>

#include "osmosis/errors.hpp"

namespace osmosis {

namespace {

void check_dims(int width, int height, int channels) {
    if (width < 1 || height < 1)
        throw ValidationError("image dimensions must be at least 1x1, got " +
                              std::to_string(width) + "x" + std::to_string(height));
    if (channels < 1)
        throw ValidationError("image needs at least one channel, got " +
                              std::to_string(channels));
}

void check_channel(const Image& img, int channel) {
    if (channel < 0 || channel >= img.channels())
        throw ValidationError("channel " + std::to_string(channel) +
                              " out of range [0, " + std::to_string(img.channels()) + ")");
}

}  // namespace

Image::Image(int width, int height, int channels, double fill) {
    check_dims(width, height, channels);
    if (!std::isfinite(fill))
        throw ValidationError("fill value must be finite");
    width_ = width;
    height_ = height;
    channels_ = channels;
    samples_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image Image::from_samples(int width, int height, int channels,
                          std::vector<double> samples) {
    check_dims(width, height, channels);
    const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
    if (samples.size() != expected)
        throw ValidationError("sample buffer holds " + std::to_string(samples.size()) +
                              " values, expected " + std::to_string(expected));
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (!std::isfinite(samples[k]))
            throw ValidationError("non-finite sample at flat index " + std::to_string(k));
    }
    Image img;
    img.width_ = width;
    img.height_ = height;
    img.channels_ = channels;
    img.samples_ = std::move(samples);
    return img;
}

void Image::set_spacing(double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ValidationError("grid spacing must be positive and finite");
    spacing_ = h;
}

void Image::set_bit_depth(int depth) {
    if (depth != 0 && depth != 8 && depth != 16)
        throw ValidationError("bit depth must be 0, 8 or 16, got " + std::to_string(depth));
    bit_depth_ = depth;
}

std::span<const double> Image::channel(int c) const {
    check_channel(*this, c);
    const std::size_t plane = static_cast<std::size_t>(width_) * height_;
    return {samples_.data() + c * plane, plane};
}

std::span<double> Image::channel(int c) {
    check_channel(*this, c);
    const std::size_t plane = static_cast<std::size_t>(width_) * height_;
    return {samples_.data() + c * plane, plane};
}

Image ensure_positive(const Image& img, double floor_value) {
    if (!(floor_value > 0.0) || !std::isfinite(floor_value))
        throw ValidationError("positivity floor must be positive and finite");
    Image out = img;
    auto data = out.samples();
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (!std::isfinite(data[k]))
            throw ValidationError("non-finite sample at flat index " + std::to_string(k));
        if (data[k] < floor_value) data[k] = floor_value;
    }
    return out;
}

double default_positivity_floor(const Image& img) {
    return img.bit_depth() == 8 || img.bit_depth() == 16 ? 1.0 : 1.0 / 255.0;
}

double mean(const Image& img, int channel) {
    check_channel(img, channel);
    auto data = img.channel(channel);
    double sum = 0.0;
    for (double v : data) sum += v;
    return sum / static_cast<double>(data.size());
}

double mean(const Image& img, int channel, const Rect& region) {
    check_channel(img, channel);
    if (region.empty())
        throw ValidationError("region " + to_string(region) + " is empty");
    if (region.x < 0 || region.y < 0 || region.x + region.width > img.width() ||
        region.y + region.height > img.height())
        throw ValidationError("region " + to_string(region) + " exceeds image bounds " +
                              std::to_string(img.width()) + "x" + std::to_string(img.height()));
    double sum = 0.0;
    for (int row = region.y; row < region.y + region.height; ++row)
        for (int col = region.x; col < region.x + region.width; ++col)
            sum += img.at(channel, row, col);
    return sum / (static_cast<double>(region.width) * region.height);
}

Image extract_channel(const Image& img, int channel) {
    check_channel(img, channel);
    auto src = img.channel(channel);
    Image out(img.width(), img.height(), 1);
    out.set_spacing(img.spacing());
    out.set_bit_depth(img.bit_depth());
    std::copy(src.begin(), src.end(), out.samples().begin());
    return out;
}

void insert_channel(Image& dst, int channel, const Image& src) {
    check_channel(dst, channel);
    if (src.channels() != 1 || src.width() != dst.width() || src.height() != dst.height())
        throw ValidationError("channel insert needs a single-channel image of matching size");
    auto plane = dst.channel(channel);
    auto data = src.channel(0);
    std::copy(data.begin(), data.end(), plane.begin());
}

}  // namespace osmosis
