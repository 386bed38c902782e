// Copyright 2025 The qscene developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Minimal lossless raster codecs (PGM/PPM/BMP, plus PNG through libpng when
 * built with QSCENE_ENABLE_PNG). Decoding converts color to grayscale with
 * ITU-R 601 luminance weights and rescales samples to [0, 1].
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "error.hpp"

#ifdef QSCENE_ENABLE_PNG
#include <png.h>
#endif

namespace qscene {

struct RasterImage {
    int height = 0;
    int width = 0;
    std::vector<double> gray; // row-major, [0, 1]
};

namespace detail {

constexpr double kLumR = 0.299;
constexpr double kLumG = 0.587;
constexpr double kLumB = 0.114;

inline std::string lower_ext(const std::string &path) {
    const std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos) {
        return "";
    }
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

/// Next whitespace-separated token, skipping '#' comment lines.
inline std::string pnm_token(std::istream &in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') {
                c = in.get();
            }
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

inline long pnm_int(std::istream &in, const std::string &path) {
    const std::string tok = pnm_token(in);
    if (tok.empty()) {
        throw IoError("truncated PNM header in " + path);
    }
    try {
        return std::stol(tok);
    } catch (const std::exception &) {
        throw IoError("bad PNM header token '" + tok + "' in " + path);
    }
}

inline RasterImage read_pnm(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    const std::string magic = pnm_token(in);
    const bool ascii = magic == "P2" || magic == "P3";
    const bool color = magic == "P3" || magic == "P6";
    if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
        throw IoError("unsupported PNM magic '" + magic + "' in " + path);
    }
    const long width = pnm_int(in, path);
    const long height = pnm_int(in, path);
    const long maxval = pnm_int(in, path);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
        throw IoError("bad PNM dimensions in " + path);
    }
    const std::size_t channels = color ? 3 : 1;
    const std::size_t count =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
        channels;
    std::vector<double> raw(count);
    if (ascii) {
        for (std::size_t i = 0; i < count; ++i) {
            raw[i] = static_cast<double>(pnm_int(in, path));
        }
    } else {
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> buf(count * bytes);
        in.read(reinterpret_cast<char *>(buf.data()),
                static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
            throw IoError("truncated PNM data in " + path);
        }
        for (std::size_t i = 0; i < count; ++i) {
            raw[i] = bytes == 1 ? buf[i]
                                : 256.0 * buf[2 * i] + buf[2 * i + 1];
        }
    }
    RasterImage img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.gray.resize(static_cast<std::size_t>(width * height));
    for (std::size_t i = 0; i < img.gray.size(); ++i) {
        double value;
        if (color) {
            value = kLumR * raw[3 * i] + kLumG * raw[3 * i + 1] +
                    kLumB * raw[3 * i + 2];
        } else {
            value = raw[i];
        }
        img.gray[i] = value / static_cast<double>(maxval);
    }
    return img;
}

inline std::uint32_t le32(const unsigned char *p) {
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t le16(const unsigned char *p) {
    return static_cast<std::uint16_t>(p[0] |
                                      (static_cast<std::uint16_t>(p[1]) << 8));
}

/// Uncompressed BI_RGB bitmaps at 8 (palette), 24, or 32 bpp.
inline RasterImage read_bmp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (data.size() < 54 || data[0] != 'B' || data[1] != 'M') {
        throw IoError("not a BMP file: " + path);
    }
    const std::uint32_t pixel_offset = le32(&data[10]);
    const std::uint32_t header_size = le32(&data[14]);
    if (header_size < 40) {
        throw IoError("unsupported BMP header in " + path);
    }
    const std::int32_t width = static_cast<std::int32_t>(le32(&data[18]));
    const std::int32_t height_raw = static_cast<std::int32_t>(le32(&data[22]));
    const std::uint16_t bpp = le16(&data[28]);
    const std::uint32_t compression = le32(&data[30]);
    if (compression != 0 || (bpp != 8 && bpp != 24 && bpp != 32)) {
        throw IoError("unsupported BMP encoding in " + path);
    }
    const bool bottom_up = height_raw > 0;
    const std::int32_t height = bottom_up ? height_raw : -height_raw;
    if (width <= 0 || height <= 0) {
        throw IoError("bad BMP dimensions in " + path);
    }

    const unsigned char *palette = nullptr;
    if (bpp == 8) {
        if (14 + header_size + 4 * 256 > data.size()) {
            throw IoError("truncated BMP palette in " + path);
        }
        palette = data.data() + 14 + header_size;
    }
    const std::size_t bytes_per_px = bpp / 8;
    const std::size_t row_bytes =
        ((static_cast<std::size_t>(width) * bytes_per_px + 3) / 4) * 4;
    RasterImage img;
    img.width = width;
    img.height = height;
    img.gray.resize(static_cast<std::size_t>(width) * height);
    for (std::int32_t r = 0; r < height; ++r) {
        const std::int32_t src_row = bottom_up ? height - 1 - r : r;
        const std::size_t row_start =
            pixel_offset + static_cast<std::size_t>(src_row) * row_bytes;
        if (row_start + row_bytes > data.size()) {
            throw IoError("truncated BMP data in " + path);
        }
        for (std::int32_t c = 0; c < width; ++c) {
            double value;
            if (bpp == 8) {
                const unsigned char idx = data[row_start + c];
                const unsigned char *entry = palette + 4 * idx;
                value = kLumB * entry[0] + kLumG * entry[1] + kLumR * entry[2];
            } else {
                const std::size_t px = row_start + c * (bpp / 8);
                value = kLumB * data[px] + kLumG * data[px + 1] +
                        kLumR * data[px + 2];
            }
            img.gray[static_cast<std::size_t>(r) * width + c] = value / 255.0;
        }
    }
    return img;
}

} // namespace detail

/// Write an 8-bit binary PGM (P5).
inline void write_pgm(const std::string &path, int height, int width,
                      const std::vector<double> &gray) {
    QSCENE_REQUIRE(gray.size() ==
                       static_cast<std::size_t>(height) * width,
                   "pixel buffer size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "P5\n" << width << " " << height << "\n255\n";
    for (double v : gray) {
        const double clamped = std::min(1.0, std::max(0.0, v));
        out.put(static_cast<char>(
            static_cast<int>(std::lround(clamped * 255.0))));
    }
}

/// Write an 8-bit binary PPM (P6) from per-channel planes.
inline void write_ppm(const std::string &path, int height, int width,
                      const std::vector<double> &r,
                      const std::vector<double> &g,
                      const std::vector<double> &b) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "P6\n" << width << " " << height << "\n255\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (const std::vector<double> *plane : {&r, &g, &b}) {
            const double clamped =
                std::min(1.0, std::max(0.0, (*plane)[i]));
            out.put(static_cast<char>(
                static_cast<int>(std::lround(clamped * 255.0))));
        }
    }
}

/// Write a 24-bit uncompressed bottom-up BMP (grayscale replicated).
inline void write_bmp(const std::string &path, int height, int width,
                      const std::vector<double> &gray) {
    const std::size_t row_bytes = ((static_cast<std::size_t>(width) * 3 + 3) / 4) * 4;
    const std::size_t data_size = row_bytes * height;
    const std::uint32_t file_size = 54 + static_cast<std::uint32_t>(data_size);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    auto put16 = [&out](std::uint16_t v) {
        out.put(static_cast<char>(v & 0xFF));
        out.put(static_cast<char>((v >> 8) & 0xFF));
    };
    auto put32 = [&out](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
        }
    };
    out.put('B');
    out.put('M');
    put32(file_size);
    put32(0);
    put32(54);
    put32(40);
    put32(static_cast<std::uint32_t>(width));
    put32(static_cast<std::uint32_t>(height));
    put16(1);
    put16(24);
    put32(0);
    put32(static_cast<std::uint32_t>(data_size));
    put32(2835);
    put32(2835);
    put32(0);
    put32(0);
    for (int r = height - 1; r >= 0; --r) {
        std::size_t written = 0;
        for (int c = 0; c < width; ++c) {
            const double v = std::min(
                1.0, std::max(0.0, gray[static_cast<std::size_t>(r) * width + c]));
            const char byte = static_cast<char>(
                static_cast<int>(std::lround(v * 255.0)));
            out.put(byte);
            out.put(byte);
            out.put(byte);
            written += 3;
        }
        while (written % 4 != 0) {
            out.put(0);
            ++written;
        }
    }
}

#ifdef QSCENE_ENABLE_PNG
namespace detail {

inline RasterImage read_png_file(const std::string &path) {
    std::FILE *fp = std::fopen(path.c_str(), "rb");
    if (fp == nullptr) {
        throw IoError("cannot open " + path);
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        if (png != nullptr) {
            png_destroy_read_struct(&png, nullptr, nullptr);
        }
        std::fclose(fp);
        throw IoError("libpng initialization failed for " + path);
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng failed to decode " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    // Normalize everything to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    row_ptrs.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) {
        row_ptrs[r] = pixels.data() + r * stride;
    }
    png_read_image(png, row_ptrs.data());
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);

    RasterImage img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.gray.resize(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < img.gray.size(); ++i) {
        const unsigned char *px = pixels.data() + 3 * i;
        img.gray[i] =
            (kLumR * px[0] + kLumG * px[1] + kLumB * px[2]) / 255.0;
    }
    return img;
}

} // namespace detail

/// Write an 8-bit grayscale PNG.
inline void write_png(const std::string &path, int height, int width,
                      const std::vector<double> &gray) {
    std::FILE *fp = std::fopen(path.c_str(), "wb");
    if (fp == nullptr) {
        throw IoError("cannot write " + path);
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        if (png != nullptr) {
            png_destroy_write_struct(&png, nullptr);
        }
        std::fclose(fp);
        throw IoError("libpng initialization failed for " + path);
    }
    std::vector<unsigned char> bytes(static_cast<std::size_t>(height) * width);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, gray[i]));
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r) {
        rows[static_cast<std::size_t>(r)] =
            bytes.data() + static_cast<std::size_t>(r) * width;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng failed to encode " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}
#endif // QSCENE_ENABLE_PNG

/// Decode any supported raster by extension.
inline RasterImage read_raster(const std::string &path) {
    const std::string ext = detail::lower_ext(path);
    if (ext == "pgm" || ext == "ppm" || ext == "pnm") {
        return detail::read_pnm(path);
    }
    if (ext == "bmp") {
        return detail::read_bmp(path);
    }
#ifdef QSCENE_ENABLE_PNG
    if (ext == "png") {
        return detail::read_png_file(path);
    }
#else
    if (ext == "png") {
        throw UnsupportedError(
            "PNG support not compiled in (QSCENE_ENABLE_PNG); " + path);
    }
#endif
    throw UnsupportedError("unsupported image extension '" + ext + "' for " +
                           path);
}

} // namespace qscene
