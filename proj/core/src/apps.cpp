#include "osmosis/apps.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "osmosis/discretize.hpp"
#include "osmosis/errors.hpp"

namespace osmosis {

namespace {

double resolve_floor(const Image& img, const RunOptions& options) {
    if (options.positivity_floor != 0.0) {
        if (!(options.positivity_floor > 0.0))
            throw ValidationError("positivity floor must be positive");
        return options.positivity_floor;
    }
    return default_positivity_floor(img);
}

void check_params(const OtsuParams& params) {
    if (params.window < 3 || params.window % 2 == 0)
        throw ValidationError("Otsu window must be odd and at least 3, got " +
                              std::to_string(params.window));
}

constexpr int kOtsuBins = 256;

// Between-class-variance-maximising split of a histogram. Returns -1
// when the window is degenerate (fewer than two occupied bins).
int otsu_threshold(const int* hist, int count, long long weighted_sum) {
    int occupied = 0;
    for (int k = 0; k < kOtsuBins && occupied < 2; ++k)
        if (hist[k] > 0) ++occupied;
    if (occupied < 2) return -1;

    int best = -1;
    double best_sigma = -1.0;
    long long w_below = 0;
    long long sum_below = 0;
    for (int t = 0; t + 1 < kOtsuBins; ++t) {
        w_below += hist[t];
        sum_below += static_cast<long long>(t) * hist[t];
        if (w_below == 0) continue;
        const long long w_above = count - w_below;
        if (w_above == 0) break;
        const double mean_below = static_cast<double>(sum_below) / w_below;
        const double mean_above =
            static_cast<double>(weighted_sum - sum_below) / w_above;
        const double diff = mean_below - mean_above;
        const double sigma = static_cast<double>(w_below) * w_above * diff * diff;
        if (sigma > best_sigma) {
            best_sigma = sigma;
            best = t;
        }
    }
    return best;
}

}  // namespace

Image light_balance(const Image& mosaic, const std::vector<Rect>& tiles,
                    const SolverConfig& config, const RunOptions& options) {
    config.validate();
    const Image positive = ensure_positive(mosaic, resolve_floor(mosaic, options));
    const FaceMask seams = seams_to_face_mask(tiles, mosaic.width(), mosaic.height());
    std::vector<DriftField> drifts;
    drifts.reserve(positive.channels());
    for (int c = 0; c < positive.channels(); ++c)
        drifts.push_back(mask_drift(canonical_drift(positive, c), seams));
    return evolve(positive, drifts, config, options.observer, options.threads);
}

TqrResult tqr_calibrate(const Image& raw, const TqrCalibration& cal) {
    if (!(cal.r_ref > 0.0) || cal.r_ref > 1.0)
        throw ValidationError("target reflectance must lie in (0, 1], got " +
                              std::to_string(cal.r_ref));
    TqrResult result;
    result.reflectance = raw;
    result.reflectance.set_bit_depth(0);
    for (int c = 0; c < raw.channels(); ++c) {
        const double u_ref = mean(raw, c, cal.target);  // validates the region
        if (!(u_ref > 0.0))
            throw ValidationError("target region mean must be positive, got " +
                                  std::to_string(u_ref) + " on channel " + std::to_string(c));
        const double scale = cal.r_ref / u_ref;
        for (double& v : result.reflectance.channel(c)) {
            v *= scale;
            if (v > 1.0) result.exceeds_unit = true;
        }
    }
    return result;
}

Image false_color(const Image& ir, const Image& vis_r, const Image& vis_g) {
    for (const Image* img : {&ir, &vis_r, &vis_g})
        if (img->channels() != 1)
            throw ValidationError("false colour inputs must be single-channel");
    if (!ir.same_shape(vis_r) || !ir.same_shape(vis_g))
        throw ValidationError("false colour inputs disagree on dimensions");

    Image out(ir.width(), ir.height(), 3);
    out.set_spacing(ir.spacing());
    if (ir.bit_depth() == vis_r.bit_depth() && ir.bit_depth() == vis_g.bit_depth())
        out.set_bit_depth(ir.bit_depth());
    insert_channel(out, 0, ir);
    insert_channel(out, 1, vis_r);
    insert_channel(out, 2, vis_g);
    return out;
}

Image local_otsu_preprocess(const Image& v2, const OtsuParams& params) {
    check_params(params);
    const int w = v2.width();
    const int h = v2.height();
    const int radius = params.window / 2;

    Image out = v2;
    std::vector<int> bins(static_cast<std::size_t>(w) * h);
    std::vector<unsigned char> is_text(static_cast<std::size_t>(w) * h);

    for (int c = 0; c < v2.channels(); ++c) {
        auto src = v2.channel(c);
        double lo = src[0], hi = src[0];
        for (double v : src) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) continue;  // constant channel: all background, kept as is

        const double scale = kOtsuBins / (hi - lo);
        for (std::size_t k = 0; k < src.size(); ++k)
            bins[k] = std::min(kOtsuBins - 1,
                               static_cast<int>((src[k] - lo) * scale));

        std::fill(is_text.begin(), is_text.end(), 0);
        std::vector<int> hist(kOtsuBins);
        for (int j = 0; j < h; ++j) {
            const int row_lo = std::max(0, j - radius);
            const int row_hi = std::min(h - 1, j + radius);

            // Histogram of the window centred on column 0, then slid right.
            std::fill(hist.begin(), hist.end(), 0);
            int count = 0;
            long long weighted = 0;
            auto add_col = [&](int col) {
                for (int r = row_lo; r <= row_hi; ++r) {
                    const int b = bins[static_cast<std::size_t>(r) * w + col];
                    ++hist[b];
                    ++count;
                    weighted += b;
                }
            };
            auto drop_col = [&](int col) {
                for (int r = row_lo; r <= row_hi; ++r) {
                    const int b = bins[static_cast<std::size_t>(r) * w + col];
                    --hist[b];
                    --count;
                    weighted -= b;
                }
            };
            for (int col = 0; col <= std::min(radius, w - 1); ++col) add_col(col);
            for (int i = 0; i < w; ++i) {
                if (i > 0) {
                    if (i + radius < w) add_col(i + radius);
                    if (i - radius - 1 >= 0) drop_col(i - radius - 1);
                }
                const int t = otsu_threshold(hist.data(), count, weighted);
                if (t >= 0 && bins[static_cast<std::size_t>(j) * w + i] <= t)
                    is_text[static_cast<std::size_t>(j) * w + i] = 1;
            }
        }

        double fill_sum = 0.0;
        long long fill_count = 0;
        if (params.fill == OtsuFill::global_mean) {
            for (double v : src) fill_sum += v;
            fill_count = static_cast<long long>(src.size());
        } else {
            for (std::size_t k = 0; k < src.size(); ++k) {
                if (!is_text[k]) {
                    fill_sum += src[k];
                    ++fill_count;
                }
            }
        }
        if (fill_count == 0) continue;  // everything is text: nothing to level
        const double fill = fill_sum / static_cast<double>(fill_count);
        auto dst = out.channel(c);
        for (std::size_t k = 0; k < dst.size(); ++k)
            if (!is_text[k]) dst[k] = fill;
    }
    return ensure_positive(out, default_positivity_floor(v2));
}

Image local_otsu_preprocess(const Image& v2, const FusionSpec& spec) {
    return local_otsu_preprocess(v2, spec.preprocessing);
}

Image fuse_multimodal(const Image& v1, const Image& v2pre, const FusionSpec& spec,
                      const SolverConfig& config, const RunOptions& options) {
    config.validate();
    if (!v1.same_shape(v2pre))
        throw ValidationError("fusion inputs disagree on dimensions or channel count");
    const RegionPartition& part = spec.partition;
    if (part.width() != v1.width() || part.height() != v1.height())
        throw ValidationError("partition " + std::to_string(part.width()) + "x" +
                              std::to_string(part.height()) + " does not match images " +
                              std::to_string(v1.width()) + "x" + std::to_string(v1.height()));

    const Image visible = ensure_positive(v1, resolve_floor(v1, options));
    const Image secondary = ensure_positive(v2pre, resolve_floor(v2pre, options));

    Image composite(v1.width(), v1.height(), v1.channels());
    composite.set_spacing(v1.spacing());
    for (int c = 0; c < v1.channels(); ++c) {
        auto a = visible.channel(c);
        auto b = secondary.channel(c);
        auto dst = composite.channel(c);
        auto labels = part.labels();
        for (std::size_t k = 0; k < dst.size(); ++k) {
            switch (labels[k]) {
                case RegionPartition::exterior: dst[k] = a[k]; break;
                case RegionPartition::interior: dst[k] = b[k]; break;
                default: dst[k] = 0.5 * (a[k] + b[k]); break;
            }
        }
    }

    std::vector<DriftField> drifts;
    drifts.reserve(v1.channels());
    for (int c = 0; c < v1.channels(); ++c)
        drifts.push_back(canonical_drift(composite, c));
    return evolve(visible, drifts, config, options.observer, options.threads);
}

}  // namespace osmosis
