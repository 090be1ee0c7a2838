#include "osmosis/discretize.hpp"

#include <cmath>
#include <string>

#include "osmosis/errors.hpp"

namespace osmosis {

namespace {

void check_single_channel(const Image& u) {
    if (u.channels() != 1)
        throw ValidationError("operator expects a single-channel image, got " +
                              std::to_string(u.channels()) + " channels");
}

void check_shapes(const DriftField& d, const Image& u) {
    check_single_channel(u);
    if (u.width() != d.width() || u.height() != d.height())
        throw ValidationError("image " + std::to_string(u.width()) + "x" +
                              std::to_string(u.height()) + " does not match drift grid " +
                              std::to_string(d.width()) + "x" + std::to_string(d.height()));
    if (u.spacing() != d.spacing())
        throw ValidationError("image and drift field disagree on grid spacing");
}

}  // namespace

DriftField canonical_drift(const Image& v, int channel) {
    auto data = v.channel(channel);  // validates the channel index
    const int w = v.width();
    const int h = v.height();
    for (std::size_t k = 0; k < data.size(); ++k)
        if (!(data[k] > 0.0))
            throw ValidationError("canonical drift needs strictly positive samples; "
                                  "sample at flat index " + std::to_string(k) + " is " +
                                  std::to_string(data[k]));

    DriftField d(w, h, v.spacing());
    const double two_over_h = 2.0 / v.spacing();
    for (int j = 0; j < h; ++j) {
        const double* row = data.data() + static_cast<std::size_t>(j) * w;
        for (int i = 0; i + 1 < w; ++i)
            d.d1(i, j) = two_over_h * (row[i + 1] - row[i]) / (row[i + 1] + row[i]);
    }
    for (int j = 0; j + 1 < h; ++j) {
        const double* row = data.data() + static_cast<std::size_t>(j) * w;
        const double* next = row + w;
        for (int i = 0; i < w; ++i)
            d.d2(i, j) = two_over_h * (next[i] - row[i]) / (next[i] + row[i]);
    }
    return d;
}

DriftField mask_drift(const DriftField& d, const FaceMask& m) {
    if (!m.matches(d))
        throw ValidationError("face mask " + std::to_string(m.width()) + "x" +
                              std::to_string(m.height()) + " does not match drift grid " +
                              std::to_string(d.width()) + "x" + std::to_string(d.height()));
    DriftField out = d;
    auto d1 = out.d1_values();
    auto k1 = m.keep1_values();
    for (std::size_t k = 0; k < d1.size(); ++k)
        if (!k1[k]) d1[k] = 0.0;
    auto d2 = out.d2_values();
    auto k2 = m.keep2_values();
    for (std::size_t k = 0; k < d2.size(); ++k)
        if (!k2[k]) d2[k] = 0.0;
    return out;
}

std::vector<int> tile_index_map(const std::vector<Rect>& tiles, int width, int height) {
    if (width < 1 || height < 1)
        throw ValidationError("tiling canvas must be at least 1x1");
    if (tiles.empty())
        throw ValidationError("tiling needs at least one rectangle");
    std::vector<int> owner(static_cast<std::size_t>(width) * height, -1);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const Rect& r = tiles[t];
        if (r.empty())
            throw ValidationError("tile #" + std::to_string(t) + " " + to_string(r) +
                                  " is empty");
        if (r.x < 0 || r.y < 0 || r.x + r.width > width || r.y + r.height > height)
            throw ValidationError("tile #" + std::to_string(t) + " " + to_string(r) +
                                  " exceeds canvas " + std::to_string(width) + "x" +
                                  std::to_string(height));
        for (int j = r.y; j < r.y + r.height; ++j) {
            for (int i = r.x; i < r.x + r.width; ++i) {
                int& cell = owner[static_cast<std::size_t>(j) * width + i];
                if (cell >= 0)
                    throw ValidationError("tiles #" + std::to_string(cell) + " " +
                                          to_string(tiles[cell]) + " and #" + std::to_string(t) +
                                          " " + to_string(r) + " overlap at pixel (" +
                                          std::to_string(i) + "," + std::to_string(j) + ")");
                cell = static_cast<int>(t);
            }
        }
    }
    for (int j = 0; j < height; ++j)
        for (int i = 0; i < width; ++i)
            if (owner[static_cast<std::size_t>(j) * width + i] < 0)
                throw ValidationError("tiling leaves pixel (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") uncovered");
    return owner;
}

FaceMask seams_to_face_mask(const std::vector<Rect>& tiles, int width, int height) {
    const std::vector<int> owner = tile_index_map(tiles, width, height);
    FaceMask mask(width, height, true);
    for (int j = 0; j < height; ++j)
        for (int i = 0; i + 1 < width; ++i)
            if (owner[static_cast<std::size_t>(j) * width + i] !=
                owner[static_cast<std::size_t>(j) * width + i + 1])
                mask.set_keep1(i, j, false);
    for (int j = 0; j + 1 < height; ++j)
        for (int i = 0; i < width; ++i)
            if (owner[static_cast<std::size_t>(j) * width + i] !=
                owner[static_cast<std::size_t>(j + 1) * width + i])
                mask.set_keep2(i, j, false);
    return mask;
}

Image apply_operator(const DriftField& d, const Image& u) {
    check_shapes(d, u);
    const int w = u.width();
    const int h = u.height();
    const double hs = d.spacing();
    const double inv_h2 = 1.0 / (hs * hs);
    const double inv_2h = 1.0 / (2.0 * hs);

    Image out(w, h, 1);
    out.set_spacing(u.spacing());
    const double* src = u.channel(0).data();
    double* dst = out.channel(0).data();

    for (int j = 0; j < h; ++j) {
        const double* row = src + static_cast<std::size_t>(j) * w;
        double* orow = dst + static_cast<std::size_t>(j) * w;
        for (int i = 0; i < w; ++i) {
            const double c = row[i];
            double acc = 0.0;
            if (i + 1 < w) {
                const double g = d.d1(i, j);
                acc += (row[i + 1] - c) * inv_h2 - g * (row[i + 1] + c) * inv_2h;
            }
            if (i > 0) {
                const double g = d.d1(i - 1, j);
                acc += (row[i - 1] - c) * inv_h2 + g * (row[i - 1] + c) * inv_2h;
            }
            if (j + 1 < h) {
                const double g = d.d2(i, j);
                acc += (row[i + w] - c) * inv_h2 - g * (row[i + w] + c) * inv_2h;
            }
            if (j > 0) {
                const double g = d.d2(i, j - 1);
                acc += (row[i - w] - c) * inv_h2 + g * (row[i - w] + c) * inv_2h;
            }
            orow[i] = acc;
        }
    }
    return out;
}

Image operator_diagonal(const DriftField& d) {
    const int w = d.width();
    const int h = d.height();
    const double hs = d.spacing();
    const double inv_h2 = 1.0 / (hs * hs);
    const double inv_2h = 1.0 / (2.0 * hs);

    Image out(w, h, 1);
    out.set_spacing(hs);
    double* dst = out.channel(0).data();
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const int degree = (i > 0) + (i + 1 < w) + (j > 0) + (j + 1 < h);
            const double west = i > 0 ? d.d1(i - 1, j) : 0.0;
            const double east = i + 1 < w ? d.d1(i, j) : 0.0;
            const double north = j > 0 ? d.d2(i, j - 1) : 0.0;
            const double south = j + 1 < h ? d.d2(i, j) : 0.0;
            dst[static_cast<std::size_t>(j) * w + i] =
                -degree * inv_h2 + (west - east) * inv_2h + (north - south) * inv_2h;
        }
    }
    return out;
}

DirectionalSystem assemble_directional(const DriftField& d, Axis axis) {
    const int w = d.width();
    const int h = d.height();
    const double hs = d.spacing();
    const double inv_h2 = 1.0 / (hs * hs);
    const double inv_2h = 1.0 / (2.0 * hs);

    DirectionalSystem sys;
    sys.axis = axis;
    sys.width = w;
    sys.height = h;
    sys.spacing = hs;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    sys.lower.assign(n, 0.0);
    sys.diag.assign(n, 0.0);
    sys.upper.assign(n, 0.0);

    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const std::size_t p = static_cast<std::size_t>(j) * w + i;
            double prev = 0.0, next = 0.0;
            int degree = 0;
            if (axis == Axis::horizontal) {
                if (i > 0) {
                    prev = d.d1(i - 1, j);
                    sys.lower[p] = inv_h2 + prev * inv_2h;
                    ++degree;
                }
                if (i + 1 < w) {
                    next = d.d1(i, j);
                    sys.upper[p] = inv_h2 - next * inv_2h;
                    ++degree;
                }
            } else {
                if (j > 0) {
                    prev = d.d2(i, j - 1);
                    sys.lower[p] = inv_h2 + prev * inv_2h;
                    ++degree;
                }
                if (j + 1 < h) {
                    next = d.d2(i, j);
                    sys.upper[p] = inv_h2 - next * inv_2h;
                    ++degree;
                }
            }
            sys.diag[p] = -degree * inv_h2 + (prev - next) * inv_2h;
        }
    }
    return sys;
}

Image apply_directional(const DirectionalSystem& sys, const Image& u) {
    check_single_channel(u);
    if (u.width() != sys.width || u.height() != sys.height)
        throw ValidationError("image does not match directional system grid");
    const int w = sys.width;
    const int h = sys.height;
    Image out(w, h, 1);
    out.set_spacing(u.spacing());
    const double* src = u.channel(0).data();
    double* dst = out.channel(0).data();
    const int stride = sys.axis == Axis::horizontal ? 1 : w;

    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const std::size_t p = static_cast<std::size_t>(j) * w + i;
            double acc = sys.diag[p] * src[p];
            if (sys.lower[p] != 0.0) acc += sys.lower[p] * src[p - stride];
            if (sys.upper[p] != 0.0) acc += sys.upper[p] * src[p + stride];
            dst[p] = acc;
        }
    }
    return out;
}

}  // namespace osmosis
