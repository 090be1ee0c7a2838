#ifndef OSMOSIS_APPS_HPP
#define OSMOSIS_APPS_HPP

#include <vector>

#include "osmosis/image.hpp"
#include "osmosis/partition.hpp"
#include "osmosis/rect.hpp"
#include "osmosis/solver.hpp"

namespace osmosis {

/// In-scene calibration target of known reflectance.
struct TqrCalibration {
    Rect target;         // pixel rectangle inside the frame
    double r_ref = 1.0;  // known target reflectance, in (0, 1]
};

struct TqrResult {
    Image reflectance;
    /// Reflectance values above 1 occur where the scene outshines the
    /// target; they are flagged here, never clipped.
    bool exceeds_unit = false;
};

enum class OtsuFill {
    background_mean,  // replace background pixels by the mean of all background pixels
    global_mean,      // replace background pixels by the whole-channel mean
};

struct OtsuParams {
    int window = 31;  // sliding window side, odd and >= 3
    OtsuFill fill = OtsuFill::background_mean;
};

/// Region layout plus preprocessing choices for multi-modal fusion.
struct FusionSpec {
    RegionPartition partition;
    OtsuParams preprocessing;
};

/// Shared knobs of the evolution pipelines.
struct RunOptions {
    /// Positivity floor applied before taking logs-like quantities;
    /// 0 selects the default for the image's bit depth.
    double positivity_floor = 0.0;
    int threads = 1;
    Observer observer;
};

/// Removes inter-tile light differences from a mosaic: the drift is the
/// mosaic's own canonical field with the seam faces annihilated, so
/// diffusion smooths across seams while the in-tile structure is kept.
/// Channel means are conserved; nothing is clamped here (only on save).
Image light_balance(const Image& mosaic, const std::vector<Rect>& tiles,
                    const SolverConfig& config, const RunOptions& options = {});

/// Pointwise reflectance from a radiometric image and an in-scene
/// target: r = raw * r_ref / mean(raw over target), per channel.
TqrResult tqr_calibrate(const Image& raw, const TqrCalibration& cal);

/// IR-R-G false colour composite: (R, G, B) <- (ir, vis_r, vis_g).
/// All three inputs must be single-channel images of equal size.
Image false_color(const Image& ir, const Image& vis_r, const Image& vis_g);

/// Segments text with a sliding-window Otsu threshold (center pixel below
/// the window threshold counts as text) and levels everything else to the
/// background mean; the result is floored to stay strictly positive.
Image local_otsu_preprocess(const Image& v2, const OtsuParams& params);
Image local_otsu_preprocess(const Image& v2, const FusionSpec& spec);

/// Fuses a secondary modality into the visible image: composites the two
/// images by region (averaging on the overlap frame), drives the
/// evolution with the composite's canonical drift and starts from the
/// visible image.
Image fuse_multimodal(const Image& v1, const Image& v2pre, const FusionSpec& spec,
                      const SolverConfig& config, const RunOptions& options = {});

}  // namespace osmosis

#endif  // OSMOSIS_APPS_HPP
