#ifndef OSMOSIS_DRIFT_HPP
#define OSMOSIS_DRIFT_HPP

#include <span>
#include <vector>

namespace osmosis {

/// Staggered-grid drift field for a width x height pixel grid.
///
/// Horizontal components sit on vertical faces between column
/// neighbours: d1(i, j) is the value at (i+1/2, j) for i in [0, W-2],
/// j in [0, H-1]. Vertical components sit on horizontal faces:
/// d2(i, j) is the value at (i, j+1/2) for i in [0, W-1], j in [0, H-2].
/// Faces on the domain boundary carry no storage; the flux through them
/// is identically zero, which realises the no-flux boundary condition.
class DriftField {
public:
    DriftField() = default;
    DriftField(int width, int height, double spacing = 1.0);

    /// Takes ownership of component buffers; sizes must be (W-1)*H and
    /// W*(H-1), all values finite.
    static DriftField from_components(int width, int height,
                                      std::vector<double> d1,
                                      std::vector<double> d2,
                                      double spacing = 1.0);

    int width() const { return width_; }
    int height() const { return height_; }
    double spacing() const { return spacing_; }

    int d1_per_row() const { return width_ - 1; }
    int d2_per_row() const { return width_; }

    double d1(int i, int j) const { return d1_[static_cast<std::size_t>(j) * (width_ - 1) + i]; }
    double& d1(int i, int j) { return d1_[static_cast<std::size_t>(j) * (width_ - 1) + i]; }
    double d2(int i, int j) const { return d2_[static_cast<std::size_t>(j) * width_ + i]; }
    double& d2(int i, int j) { return d2_[static_cast<std::size_t>(j) * width_ + i]; }

    std::span<const double> d1_values() const { return d1_; }
    std::span<double> d1_values() { return d1_; }
    std::span<const double> d2_values() const { return d2_; }
    std::span<double> d2_values() { return d2_; }

    bool same_shape(const DriftField& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    double spacing_ = 1.0;
    std::vector<double> d1_;  // (W-1) x H, row-major
    std::vector<double> d2_;  // W x (H-1), row-major
};

/// Boolean gate over staggered faces; shapes mirror the DriftField the
/// mask applies to. keep == false annihilates the drift on that face.
class FaceMask {
public:
    FaceMask() = default;
    FaceMask(int width, int height, bool initial = true);

    int width() const { return width_; }
    int height() const { return height_; }

    bool keep1(int i, int j) const { return keep1_[static_cast<std::size_t>(j) * (width_ - 1) + i] != 0; }
    bool keep2(int i, int j) const { return keep2_[static_cast<std::size_t>(j) * width_ + i] != 0; }
    void set_keep1(int i, int j, bool keep) { keep1_[static_cast<std::size_t>(j) * (width_ - 1) + i] = keep ? 1 : 0; }
    void set_keep2(int i, int j, bool keep) { keep2_[static_cast<std::size_t>(j) * width_ + i] = keep ? 1 : 0; }

    std::span<const unsigned char> keep1_values() const { return keep1_; }
    std::span<const unsigned char> keep2_values() const { return keep2_; }

    /// Number of annihilated faces, per component.
    long long masked1_count() const;
    long long masked2_count() const;

    bool matches(const DriftField& d) const {
        return width_ == d.width() && height_ == d.height();
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<unsigned char> keep1_;
    std::vector<unsigned char> keep2_;
};

}  // namespace osmosis

#endif  // OSMOSIS_DRIFT_HPP
