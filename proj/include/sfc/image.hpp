#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sfc {

/// Rectangular scalar or RGB field with values in [0,1], row-major storage.
/// Flat pixel index i corresponds to (row, col) = (i / width, i % width).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1; // 1 (gray) or 3 (RGB)
    std::vector<double> data; // width*height*channels, interleaved

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<size_t>(w) * h * c, fill) {}

    int pixel_count() const { return width * height; }

    double& at(int y, int x, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
};

/// Hard segmentation: per-pixel segment ids, contiguous 0..k-1,
/// every id occurring at least once.
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int> labels; // width*height, row-major

    LabelMap() = default;
    LabelMap(int w, int h) : width(w), height(h), labels(static_cast<size_t>(w) * h, 0) {}

    int& at(int y, int x) { return labels[static_cast<size_t>(y) * width + x]; }
    int at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }
    int num_segments() const;
};

/// Loads PGM (P2/P5), PPM (P3/P6) or 8-bit PNG. Values are scaled by
/// 1/maxval into [0,1]. Throws IoError with the offending byte offset or
/// field on malformed input.
Image load_image(const std::string& path);

/// Saves 8-bit output, round(v*255); format chosen by extension
/// (.png, .pgm, .ppm). Gray images may be saved as .ppm and vice versa only
/// when channel counts allow.
void save_image(const Image& img, const std::string& path);

/// BT.601 luma: 0.299 R + 0.587 G + 0.114 B. Gray input returned unchanged.
Image to_grayscale(const Image& img);

/// Nearest-neighbor resampling, src index = floor(dst * src_dim / dst_dim).
Image resize_nearest(const Image& img, int new_w, int new_h);

/// Fixed 256-entry label palette; id 0 is black, all entries distinct.
std::array<std::array<std::uint8_t, 3>, 256> label_palette();

/// LabelMap as paletted PNG (ids must be < 256).
void save_labelmap_png(const LabelMap& labels, const std::string& path);

/// LabelMap as plain (P2) PGM of raw ids, maxval 255.
void save_labelmap_pgm(const LabelMap& labels, const std::string& path);

} // namespace sfc
