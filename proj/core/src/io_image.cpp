#include "osmosis/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osmosis/errors.hpp"

namespace osmosis {

namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr fp(std::fopen(path.c_str(), mode), &std::fclose);
    if (!fp) throw IoError("cannot open " + path);
    return fp;
}

std::string lower_extension(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::string sidecar_path(const std::string& path) { return path + ".scale.txt"; }

Image assemble(int width, int height, int channels, int bit_depth,
               const std::vector<double>& interleaved) {
    std::vector<double> planar(interleaved.size());
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    for (std::size_t p = 0; p < plane; ++p)
        for (int c = 0; c < channels; ++c)
            planar[static_cast<std::size_t>(c) * plane + p] =
                interleaved[p * channels + c];
    Image img = Image::from_samples(width, height, channels, std::move(planar));
    img.set_bit_depth(bit_depth);
    return img;
}

// ---- PNG ----

Image load_png(const std::string& path) {
    FilePtr fp = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("PNG reader allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("PNG reader allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("PNG decode failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    int channels = 0;
    if (color == PNG_COLOR_TYPE_GRAY)
        channels = 1;
    else if (color == PNG_COLOR_TYPE_RGB)
        channels = 3;
    if (channels == 0 || (depth != 8 && depth != 16)) {
        png_destroy_read_struct(&png, &info, nullptr);
        if (channels == 0)
            throw IoError("unsupported PNG color type " + std::to_string(color) +
                          " in " + path + " (grayscale and RGB only)");
        throw IoError("unsupported bit depth " + std::to_string(depth) + " in " + path);
    }

    const std::size_t rowbytes =
        static_cast<std::size_t>(width) * channels * (depth / 8);
    std::vector<unsigned char> row(rowbytes);
    std::vector<double> interleaved(static_cast<std::size_t>(width) * height * channels);
    for (int j = 0; j < height; ++j) {
        png_read_row(png, row.data(), nullptr);
        double* dst = interleaved.data() + static_cast<std::size_t>(j) * width * channels;
        if (depth == 8) {
            for (std::size_t k = 0; k < rowbytes; ++k) dst[k] = row[k];
        } else {
            for (std::size_t k = 0; k + 1 < rowbytes; k += 2)
                dst[k / 2] = static_cast<double>((row[k] << 8) | row[k + 1]);
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return assemble(width, height, channels, depth, interleaved);
}

void save_png(const std::string& path, int width, int height, int channels,
              int depth, const std::vector<std::uint16_t>& interleaved) {
    FilePtr fp = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("PNG writer allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("PNG writer allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encode failed: " + path);
    }
    png_init_io(png, fp.get());
    const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), depth, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const std::size_t rowbytes =
        static_cast<std::size_t>(width) * channels * (depth / 8);
    std::vector<unsigned char> row(rowbytes);
    for (int j = 0; j < height; ++j) {
        const std::uint16_t* src =
            interleaved.data() + static_cast<std::size_t>(j) * width * channels;
        if (depth == 8) {
            for (std::size_t k = 0; k < rowbytes; ++k)
                row[k] = static_cast<unsigned char>(src[k]);
        } else {
            for (std::size_t k = 0; k + 1 < rowbytes; k += 2) {
                row[k] = static_cast<unsigned char>(src[k / 2] >> 8);
                row[k + 1] = static_cast<unsigned char>(src[k / 2] & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---- PGM / PPM (binary) ----

int pnm_token(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        } else {
            c = in.get();
        }
    }
    if (c == EOF || !std::isdigit(c))
        throw IoError("malformed PNM header in " + path);
    long value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        if (value > 1000000000) throw IoError("PNM header value out of range in " + path);
        c = in.get();
    }
    if (c != EOF) in.unget();
    return static_cast<int>(value);
}

Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    const int channels = magic[1] == '5' ? 1 : 3;
    const int width = pnm_token(in, path);
    const int height = pnm_token(in, path);
    const int maxval = pnm_token(in, path);
    if (width <= 0 || height <= 0)
        throw IoError("invalid PNM dimensions in " + path);
    if (maxval < 1 || maxval > 65535)
        throw IoError("unsupported PNM maxval " + std::to_string(maxval) + " in " + path);
    in.get();  // single whitespace byte before the raster

    const int bytes_per = maxval > 255 ? 2 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    std::vector<unsigned char> raw(count * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw IoError("truncated PNM raster in " + path);

    std::vector<double> interleaved(count);
    if (bytes_per == 1) {
        for (std::size_t k = 0; k < count; ++k) interleaved[k] = raw[k];
    } else {
        for (std::size_t k = 0; k < count; ++k)
            interleaved[k] = static_cast<double>((raw[2 * k] << 8) | raw[2 * k + 1]);
    }
    return assemble(width, height, channels, maxval > 255 ? 16 : 8, interleaved);
}

void save_pnm(const std::string& path, int width, int height, int channels,
              int maxval, const std::vector<std::uint16_t>& interleaved) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path);
    out << (channels == 1 ? "P5" : "P6") << "\n"
        << width << " " << height << "\n"
        << maxval << "\n";
    const std::size_t count = interleaved.size();
    std::vector<unsigned char> raw;
    if (maxval > 255) {
        raw.resize(count * 2);
        for (std::size_t k = 0; k < count; ++k) {
            raw[2 * k] = static_cast<unsigned char>(interleaved[k] >> 8);
            raw[2 * k + 1] = static_cast<unsigned char>(interleaved[k] & 0xff);
        }
    } else {
        raw.resize(count);
        for (std::size_t k = 0; k < count; ++k)
            raw[k] = static_cast<unsigned char>(interleaved[k]);
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("write failed: " + path);
}

// ---- Restricted TIFF reader ----

struct TiffEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::uint32_t field = 0;  // offset of the 4-byte value/offset field
};

std::uint16_t u16_at(const std::vector<unsigned char>& b, std::size_t pos, bool little) {
    if (pos + 2 > b.size()) throw IoError("truncated TIFF");
    return little ? static_cast<std::uint16_t>(b[pos] | (b[pos + 1] << 8))
                  : static_cast<std::uint16_t>((b[pos] << 8) | b[pos + 1]);
}

std::uint32_t u32_at(const std::vector<unsigned char>& b, std::size_t pos, bool little) {
    if (pos + 4 > b.size()) throw IoError("truncated TIFF");
    return little ? (static_cast<std::uint32_t>(b[pos]) |
                     (static_cast<std::uint32_t>(b[pos + 1]) << 8) |
                     (static_cast<std::uint32_t>(b[pos + 2]) << 16) |
                     (static_cast<std::uint32_t>(b[pos + 3]) << 24))
                  : (static_cast<std::uint32_t>(b[pos]) << 24) |
                        (static_cast<std::uint32_t>(b[pos + 1]) << 16) |
                        (static_cast<std::uint32_t>(b[pos + 2]) << 8) |
                        static_cast<std::uint32_t>(b[pos + 3]);
}

Image load_tiff(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
    if (b.size() < 8) throw IoError("truncated TIFF: " + path);
    const bool little = b[0] == 'I';
    const std::uint16_t magic = u16_at(b, 2, little);
    if (magic == 43) throw IoError("BigTIFF not supported: " + path);
    if (magic != 42) throw IoError("not a TIFF file: " + path);

    const std::uint32_t ifd = u32_at(b, 4, little);
    const std::uint16_t n_entries = u16_at(b, ifd, little);
    std::vector<std::pair<std::uint16_t, TiffEntry>> entries;
    for (std::uint16_t e = 0; e < n_entries; ++e) {
        const std::size_t pos = ifd + 2 + static_cast<std::size_t>(e) * 12;
        const std::uint16_t tag = u16_at(b, pos, little);
        TiffEntry entry;
        entry.type = u16_at(b, pos + 2, little);
        entry.count = u32_at(b, pos + 4, little);
        entry.field = static_cast<std::uint32_t>(pos + 8);
        entries.emplace_back(tag, entry);
    }
    auto find = [&](std::uint16_t tag) -> const TiffEntry* {
        for (const auto& [t, e] : entries)
            if (t == tag) return &e;
        return nullptr;
    };
    auto scalar = [&](std::uint16_t tag, std::optional<std::uint32_t> fallback,
                      const char* name) -> std::uint32_t {
        const TiffEntry* e = find(tag);
        if (!e) {
            if (fallback) return *fallback;
            throw IoError(std::string("TIFF missing required tag ") + name + ": " + path);
        }
        if (e->count != 1)
            throw IoError(std::string("unsupported TIFF: tag ") + name +
                          " has count " + std::to_string(e->count) + ": " + path);
        if (e->type == 3) return u16_at(b, e->field, little);
        if (e->type == 4) return u32_at(b, e->field, little);
        throw IoError(std::string("unsupported TIFF tag type for ") + name + ": " + path);
    };

    const std::uint32_t width = scalar(256, std::nullopt, "ImageWidth");
    const std::uint32_t height = scalar(257, std::nullopt, "ImageLength");
    const std::uint32_t bits = scalar(258, 1, "BitsPerSample");
    const std::uint32_t compression = scalar(259, 1, "Compression");
    const std::uint32_t photometric = scalar(262, std::nullopt, "PhotometricInterpretation");
    const std::uint32_t samples = scalar(277, 1, "SamplesPerPixel");
    const std::uint32_t sample_format = scalar(339, 1, "SampleFormat");

    if (compression != 1)
        throw IoError("unsupported TIFF compression " + std::to_string(compression) +
                      ": " + path + " (uncompressed only)");
    if (photometric == 0)
        throw IoError("unsupported TIFF photometric interpretation 0 (white-is-zero): " + path);
    if (photometric != 1)
        throw IoError("unsupported TIFF photometric interpretation " +
                      std::to_string(photometric) + ": " + path + " (grayscale only)");
    if (samples != 1)
        throw IoError("unsupported TIFF samples per pixel " + std::to_string(samples) +
                      ": " + path + " (grayscale only)");
    if (sample_format == 3 || (bits != 8 && bits != 16))
        throw IoError("unsupported bit depth in " + path + ": " + std::to_string(bits) +
                      "-bit" + (sample_format == 3 ? " floating point" : "") +
                      " (8/16-bit unsigned only)");

    const TiffEntry* strips = find(273);
    if (!strips) throw IoError("TIFF missing required tag StripOffsets: " + path);
    if (strips->count != 1)
        throw IoError("multi-strip TIFF not supported: " + path + " (" +
                      std::to_string(strips->count) + " strips)");
    const std::uint32_t data_at = strips->type == 3 ? u16_at(b, strips->field, little)
                                                    : u32_at(b, strips->field, little);

    const std::size_t count = static_cast<std::size_t>(width) * height;
    const std::size_t needed = count * (bits / 8);
    if (data_at + needed > b.size())
        throw IoError("truncated TIFF raster in " + path);

    std::vector<double> interleaved(count);
    if (bits == 8) {
        for (std::size_t k = 0; k < count; ++k) interleaved[k] = b[data_at + k];
    } else {
        for (std::size_t k = 0; k < count; ++k)
            interleaved[k] = u16_at(b, data_at + 2 * k, little);
    }
    return assemble(static_cast<int>(width), static_cast<int>(height), 1,
                    static_cast<int>(bits), interleaved);
}

// ---- Dispatch ----

std::optional<double> read_sidecar(const std::string& path) {
    std::ifstream in(sidecar_path(path));
    if (!in) return std::nullopt;
    double scale = 0.0;
    in >> scale;
    if (!in || !(scale > 0.0) || !std::isfinite(scale))
        throw IoError("invalid scale sidecar: " + sidecar_path(path));
    return scale;
}

}  // namespace

Image load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    unsigned char magic[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(magic), 2);
    if (probe.gcount() != 2) throw IoError("unrecognized image format: " + path);
    probe.close();

    Image img = [&] {
        if (magic[0] == 0x89 && magic[1] == 'P') return load_png(path);
        if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) return load_pnm(path);
        if ((magic[0] == 'I' && magic[1] == 'I') || (magic[0] == 'M' && magic[1] == 'M'))
            return load_tiff(path);
        throw IoError("unrecognized image format: " + path +
                      " (PNG, binary PGM/PPM, or restricted TIFF expected)");
    }();

    if (const auto scale = read_sidecar(path)) {
        for (int c = 0; c < img.channels(); ++c)
            for (double& v : img.channel(c)) v /= *scale;
        img.set_bit_depth(0);
    }
    return img;
}

void save_image(const Image& img, const std::string& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".tif" || ext == ".tiff")
        throw IoError("TIFF save not supported (read-only format): " + path);
    if (ext != ".png" && ext != ".pgm" && ext != ".ppm")
        throw IoError("unsupported image format for save: " + path +
                      " (.png, .pgm, .ppm supported)");
    if (ext == ".pgm" && img.channels() != 1)
        throw IoError("PGM requires a single channel, image has " +
                      std::to_string(img.channels()) + ": " + path);
    if (ext == ".ppm" && img.channels() != 3)
        throw IoError("PPM requires three channels, image has " +
                      std::to_string(img.channels()) + ": " + path);
    if (ext == ".png" && img.channels() != 1 && img.channels() != 3)
        throw IoError("PNG save supports 1 or 3 channels, image has " +
                      std::to_string(img.channels()) + ": " + path);

    const bool float_pipeline = img.bit_depth() == 0;
    const int depth = img.bit_depth() == 8 ? 8 : 16;
    const int maxval = depth == 8 ? 255 : 65535;

    double scale = 1.0;
    if (float_pipeline) {
        double peak = 0.0;
        for (int c = 0; c < img.channels(); ++c)
            for (double v : img.channel(c)) peak = std::max(peak, v);
        scale = peak > 0.0 ? maxval / peak : 1.0;
    }

    const std::size_t plane = static_cast<std::size_t>(img.width()) * img.height();
    std::vector<std::uint16_t> interleaved(plane * img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        auto src = img.channel(c);
        for (std::size_t p = 0; p < plane; ++p) {
            const double q = std::clamp(src[p] * scale, 0.0, static_cast<double>(maxval));
            interleaved[p * img.channels() + c] = static_cast<std::uint16_t>(std::llround(q));
        }
    }

    if (ext == ".png")
        save_png(path, img.width(), img.height(), img.channels(), depth, interleaved);
    else
        save_pnm(path, img.width(), img.height(), img.channels(), maxval, interleaved);

    if (float_pipeline) {
        std::ofstream out(sidecar_path(path));
        if (!out) throw IoError("cannot open " + sidecar_path(path));
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g\n", scale);
        out << buf;
        if (!out) throw IoError("write failed: " + sidecar_path(path));
    } else {
        std::error_code ec;
        std::filesystem::remove(sidecar_path(path), ec);  // stale sidecar would rescale
    }
}

}  // namespace osmosis
