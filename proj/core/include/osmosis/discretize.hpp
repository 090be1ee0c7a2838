#ifndef OSMOSIS_DISCRETIZE_HPP
#define OSMOSIS_DISCRETIZE_HPP

#include <vector>

#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"
#include "osmosis/rect.hpp"

namespace osmosis {

enum class Axis { horizontal, vertical };

/// One directional part A_n of the space-discrete drift-diffusion
/// operator A = A1 + A2. Each grid line along the axis is an
/// independent tridiagonal block; coefficients are stored in image
/// layout (index row*width + col) so that lines are strided views.
/// lower/upper couple a pixel to its predecessor/successor along the
/// axis and are zero where that neighbour falls outside the grid.
///
/// Column sums of the assembled block vanish (no-flux closure), which
/// is what makes every time stepper conserve the channel mean.
struct DirectionalSystem {
    Axis axis = Axis::horizontal;
    int width = 0;
    int height = 0;
    double spacing = 1.0;
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
};

/// Canonical drift of a strictly positive reference channel. The face
/// value uses the arithmetic-mean form
///   d1(i+1/2, j) = (2/h) * (v[i+1,j] - v[i,j]) / (v[i+1,j] + v[i,j])
/// which makes apply_operator(canonical_drift(v), v) vanish face by
/// face; the steady state of the evolution is then exactly a rescaled
/// copy of v. Rejects non-positive samples.
DriftField canonical_drift(const Image& v, int channel = 0);

/// Zeroes the drift on faces with keep == false, copies the rest.
DriftField mask_drift(const DriftField& d, const FaceMask& m);

/// Paints a tile index per pixel and validates that the rectangles
/// tile [0,W)x[0,H) exactly; gaps, overlaps and out-of-bounds tiles
/// are reported with the offending rectangle(s).
std::vector<int> tile_index_map(const std::vector<Rect>& tiles, int width, int height);

/// Face mask that annihilates drift exactly on faces whose two adjacent
/// pixels belong to different tiles (the seam set of a mosaic).
FaceMask seams_to_face_mask(const std::vector<Rect>& tiles, int width, int height);

/// Matrix-free application of A to a single-channel image: per pixel the
/// five-point divergence of the flux (grad u - d u) with face-averaged
/// u values and zero flux through the domain boundary.
Image apply_operator(const DriftField& d, const Image& u);

/// Per-pixel diagonal of A (single-channel image). Feeds the explicit
/// step bound and Jacobi preconditioning.
Image operator_diagonal(const DriftField& d);

/// Assembles the directional tridiagonal blocks. Each A_n carries the
/// in-line diffusion couplings plus only its own axis' drift-divergence
/// diagonal terms, so that A1 + A2 reproduces apply_operator exactly.
DirectionalSystem assemble_directional(const DriftField& d, Axis axis);

/// Applies an assembled directional block to a single-channel image.
Image apply_directional(const DirectionalSystem& sys, const Image& u);

}  // namespace osmosis

#endif  // OSMOSIS_DISCRETIZE_HPP
