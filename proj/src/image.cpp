#include "sfc/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

#include "sfc/errors.hpp"

namespace sfc {

namespace {

std::string lower_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

// --- PNM ------------------------------------------------------------------

// Skips whitespace and '#' comments; returns the next token. Throws with the
// byte offset of the failure.
std::string pnm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
                tok.push_back(static_cast<char>(in.get()));
            return tok;
        }
    }
    throw IoError(path + ": unexpected end of header at byte offset " +
                  std::to_string(static_cast<long long>(in.tellg())));
}

int pnm_int(std::istream& in, const std::string& path, const char* field) {
    auto pos = in.tellg();
    std::string tok = pnm_token(in, path);
    try {
        size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError(path + ": malformed " + std::string(field) + " '" + tok +
                      "' near byte offset " + std::to_string(static_cast<long long>(pos)));
    }
}

Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": unreadable file");

    char p = 0, kind = 0;
    in.get(p);
    in.get(kind);
    if (p != 'P' || (kind != '2' && kind != '3' && kind != '5' && kind != '6'))
        throw IoError(path + ": unsupported PNM magic at byte offset 0");

    const bool color = (kind == '3' || kind == '6');
    const bool binary = (kind == '5' || kind == '6');
    const int channels = color ? 3 : 1;

    int w = pnm_int(in, path, "width");
    int h = pnm_int(in, path, "height");
    int maxval = pnm_int(in, path, "maxval");
    if (w <= 0 || h <= 0) throw IoError(path + ": non-positive dimensions");
    if (maxval <= 0 || maxval > 65535) throw IoError(path + ": unsupported maxval");

    Image img(w, h, channels);
    const size_t count = img.data.size();
    const double scale = 1.0 / maxval;

    if (binary) {
        // exactly one whitespace byte separates maxval from the raster
        in.get();
        if (maxval < 256) {
            std::vector<unsigned char> raw(count);
            in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
            if (static_cast<size_t>(in.gcount()) != count)
                throw IoError(path + ": truncated raster at byte offset " +
                              std::to_string(static_cast<long long>(in.tellg())));
            for (size_t i = 0; i < count; ++i) img.data[i] = raw[i] * scale;
        } else {
            std::vector<unsigned char> raw(count * 2);
            in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 2));
            if (static_cast<size_t>(in.gcount()) != count * 2)
                throw IoError(path + ": truncated raster at byte offset " +
                              std::to_string(static_cast<long long>(in.tellg())));
            for (size_t i = 0; i < count; ++i) {
                int v = (raw[2 * i] << 8) | raw[2 * i + 1]; // big-endian
                img.data[i] = v * scale;
            }
        }
    } else {
        for (size_t i = 0; i < count; ++i) {
            int v = pnm_int(in, path, "sample");
            if (v < 0 || v > maxval)
                throw IoError(path + ": sample " + std::to_string(v) + " out of range");
            img.data[i] = v * scale;
        }
    }
    return img;
}

void save_pnm(const Image& img, const std::string& path, bool color) {
    if (color && img.channels != 3)
        throw IoError(path + ": cannot write gray data as PPM");
    if (!color && img.channels != 1)
        throw IoError(path + ": cannot write color data as PGM");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << (color ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        double v = img.data[i];
        long q = std::lround(v * 255.0);
        raw[i] = static_cast<unsigned char>(std::clamp(q, 0L, 255L));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError(path + ": write failed");
}

// --- PNG ------------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

Image load_png(const std::string& path) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) throw IoError(path + ": unreadable file");

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw IoError(path + ": not a PNG (bad signature at byte offset 0)");

    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = png_create_info_struct(r.png);
    if (!r.png || !r.info) throw IoError(path + ": libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) throw IoError(path + ": malformed PNG stream");

    png_init_io(r.png, r.fp);
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);
    if (bit_depth == 16)
        throw IoError(path + ": unsupported bit depth 16 (field bit_depth)");

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);
    png_read_update_info(r.png, r.info);

    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    const int ch = static_cast<int>(png_get_channels(r.png, r.info));
    if (ch != 1 && ch != 3)
        throw IoError(path + ": unsupported channel count " + std::to_string(ch));

    std::vector<unsigned char> raw(static_cast<size_t>(w) * h * ch);
    std::vector<png_bytep> rows(static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = raw.data() + static_cast<size_t>(y) * w * ch;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    Image img(w, h, ch);
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.0;
    return img;
}

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void save_png(const Image& img, const std::string& path) {
    PngWriter w;
    w.fp = std::fopen(path.c_str(), "wb");
    if (!w.fp) throw IoError(path + ": cannot open for writing");
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (!w.png || !w.info) throw IoError(path + ": libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) throw IoError(path + ": PNG write failed");

    png_init_io(w.png, w.fp);
    const int color_type = img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    std::vector<unsigned char> raw(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        long q = std::lround(img.data[i] * 255.0);
        raw[i] = static_cast<unsigned char>(std::clamp(q, 0L, 255L));
    }
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = raw.data() + static_cast<size_t>(y) * img.width * img.channels;
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

} // namespace

int LabelMap::num_segments() const {
    int mx = -1;
    for (int v : labels) mx = std::max(mx, v);
    return mx + 1;
}

Image load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError(path + ": unreadable file");
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (magic[0] == 'P' && magic[1] >= '2' && magic[1] <= '6') return load_pnm(path);
    return load_png(path);
}

void save_image(const Image& img, const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") {
        save_png(img, path);
    } else if (ext == "pgm") {
        save_pnm(img.channels == 3 ? to_grayscale(img) : img, path, /*color=*/false);
    } else if (ext == "ppm") {
        save_pnm(img, path, /*color=*/true);
    } else {
        throw IoError(path + ": unknown output extension '" + ext + "'");
    }
}

Image to_grayscale(const Image& img) {
    if (img.channels == 1) return img;
    Image gray(img.width, img.height, 1);
    for (int i = 0; i < img.pixel_count(); ++i) {
        const double* p = &img.data[static_cast<size_t>(i) * 3];
        gray.data[static_cast<size_t>(i)] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
    return gray;
}

Image resize_nearest(const Image& img, int new_w, int new_h) {
    if (new_w <= 0 || new_h <= 0)
        throw std::invalid_argument("resize_nearest: non-positive dimension");
    Image out(new_w, new_h, img.channels);
    for (int y = 0; y < new_h; ++y) {
        const int sy = static_cast<int>(static_cast<long long>(y) * img.height / new_h);
        for (int x = 0; x < new_w; ++x) {
            const int sx = static_cast<int>(static_cast<long long>(x) * img.width / new_w);
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    }
    return out;
}

std::array<std::array<std::uint8_t, 3>, 256> label_palette() {
    auto bitrev8 = [](unsigned v) {
        v = ((v & 0xF0u) >> 4) | ((v & 0x0Fu) << 4);
        v = ((v & 0xCCu) >> 2) | ((v & 0x33u) << 2);
        v = ((v & 0xAAu) >> 1) | ((v & 0x55u) << 1);
        return v & 0xFFu;
    };
    std::array<std::array<std::uint8_t, 3>, 256> pal{};
    pal[0] = {0, 0, 0};
    for (unsigned i = 1; i < 256; ++i) {
        // red channel alone is injective (bit reversal), so entries are distinct
        pal[i] = {static_cast<std::uint8_t>(bitrev8(i)),
                  static_cast<std::uint8_t>((i * 97u + 53u * (i >> 2)) & 0xFFu),
                  static_cast<std::uint8_t>((i * 193u + 29u) & 0xFFu)};
    }
    return pal;
}

void save_labelmap_png(const LabelMap& labels, const std::string& path) {
    if (labels.num_segments() > 256)
        throw IoError(path + ": more than 256 segments cannot be palettized");
    PngWriter w;
    w.fp = std::fopen(path.c_str(), "wb");
    if (!w.fp) throw IoError(path + ": cannot open for writing");
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (!w.png || !w.info) throw IoError(path + ": libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) throw IoError(path + ": PNG write failed");

    png_init_io(w.png, w.fp);
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(labels.width),
                 static_cast<png_uint_32>(labels.height), 8, PNG_COLOR_TYPE_PALETTE,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);

    const auto pal = label_palette();
    std::array<png_color, 256> plte{};
    for (size_t i = 0; i < 256; ++i)
        plte[i] = {pal[i][0], pal[i][1], pal[i][2]};
    png_set_PLTE(w.png, w.info, plte.data(), 256);
    png_write_info(w.png, w.info);

    std::vector<unsigned char> raw(labels.labels.size());
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<unsigned char>(labels.labels[i]);
    std::vector<png_bytep> rows(static_cast<size_t>(labels.height));
    for (int y = 0; y < labels.height; ++y)
        rows[static_cast<size_t>(y)] = raw.data() + static_cast<size_t>(y) * labels.width;
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

void save_labelmap_pgm(const LabelMap& labels, const std::string& path) {
    if (labels.num_segments() > 256)
        throw IoError(path + ": more than 256 segments cannot be written as 8-bit ids");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << "P2\n" << labels.width << " " << labels.height << "\n255\n";
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x)
            out << labels.at(y, x) << (x + 1 == labels.width ? '\n' : ' ');
    }
    if (!out) throw IoError(path + ": write failed");
}

} // namespace sfc
