#include "osmosis/drift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "osmosis/errors.hpp"

namespace osmosis {

namespace {

void check_grid(int width, int height) {
    if (width < 1 || height < 1)
        throw ValidationError("drift field needs a grid of at least 1x1, got " +
                              std::to_string(width) + "x" + std::to_string(height));
}

}  // namespace

DriftField::DriftField(int width, int height, double spacing) {
    check_grid(width, height);
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw ValidationError("grid spacing must be positive and finite");
    width_ = width;
    height_ = height;
    spacing_ = spacing;
    d1_.assign(static_cast<std::size_t>(width - 1) * height, 0.0);
    d2_.assign(static_cast<std::size_t>(width) * (height - 1), 0.0);
}

DriftField DriftField::from_components(int width, int height,
                                       std::vector<double> d1,
                                       std::vector<double> d2,
                                       double spacing) {
    DriftField field(width, height, spacing);
    const std::size_t n1 = static_cast<std::size_t>(width - 1) * height;
    const std::size_t n2 = static_cast<std::size_t>(width) * (height - 1);
    if (d1.size() != n1)
        throw ValidationError("d1 buffer holds " + std::to_string(d1.size()) +
                              " values, expected " + std::to_string(n1));
    if (d2.size() != n2)
        throw ValidationError("d2 buffer holds " + std::to_string(d2.size()) +
                              " values, expected " + std::to_string(n2));
    for (std::size_t k = 0; k < d1.size(); ++k)
        if (!std::isfinite(d1[k]))
            throw ValidationError("non-finite d1 component at flat index " + std::to_string(k));
    for (std::size_t k = 0; k < d2.size(); ++k)
        if (!std::isfinite(d2[k]))
            throw ValidationError("non-finite d2 component at flat index " + std::to_string(k));
    field.d1_ = std::move(d1);
    field.d2_ = std::move(d2);
    return field;
}

FaceMask::FaceMask(int width, int height, bool initial) {
    check_grid(width, height);
    width_ = width;
    height_ = height;
    keep1_.assign(static_cast<std::size_t>(width - 1) * height, initial ? 1 : 0);
    keep2_.assign(static_cast<std::size_t>(width) * (height - 1), initial ? 1 : 0);
}

long long FaceMask::masked1_count() const {
    return std::count(keep1_.begin(), keep1_.end(), static_cast<unsigned char>(0));
}

long long FaceMask::masked2_count() const {
    return std::count(keep2_.begin(), keep2_.end(), static_cast<unsigned char>(0));
}

}  // namespace osmosis
