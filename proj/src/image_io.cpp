// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace cbcd {

namespace {

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Skips whitespace and '#' comments in a PNM header, collecting comment lines.
void pnm_skip(std::istream& in, std::vector<std::string>* comments = nullptr) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            if (comments) comments->push_back(line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

void pnm_read_dims(std::istream& in, const std::string& path, int& w, int& h,
                   std::vector<std::string>* comments = nullptr) {
    int maxval = 0;
    pnm_skip(in, comments);
    in >> w;
    pnm_skip(in, comments);
    in >> h;
    pnm_skip(in, comments);
    in >> maxval;
    if (!in || w <= 0 || h <= 0) throw DataError("bad PNM header: " + path);
    if (maxval != 255) throw DataError("only 8-bit PNM supported (maxval 255): " + path);
    in.get();  // single whitespace before raster
}

}  // namespace

RgbImage read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DataError("cannot open: " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw DataError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("libpng init failed");
    }
    std::vector<std::vector<png_byte>> rows;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("PNG decode failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    const png_byte color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    rows.assign(h, std::vector<png_byte>(rowbytes));
    row_ptrs.resize(h);
    for (int y = 0; y < h; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    RgbImage img(h, w);
    for (int y = 0; y < h; ++y) {
        const png_byte* row = rows[y].data();
        for (int x = 0; x < w; ++x) {
            img.r.at(y, x) = row[3 * x + 0];
            img.g.at(y, x) = row[3 * x + 1];
            img.b.at(y, x) = row[3 * x + 2];
        }
    }
    return img;
}

void write_png(const std::string& path, const RgbImage& img) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw DataError("cannot write: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng init failed");
    }
    std::vector<png_byte> row(static_cast<std::size_t>(img.width()) * 3);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("PNG encode failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            row[3 * x + 0] = quantize(img.r.at(y, x));
            row[3 * x + 1] = quantize(img.g.at(y, x));
            row[3 * x + 2] = quantize(img.b.at(y, x));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

RgbImage read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P6") throw DataError("not a binary PPM (P6): " + path);
    int w = 0, h = 0;
    pnm_read_dims(in, path, w, h);
    std::vector<std::uint8_t> raster(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!in) throw DataError("truncated PPM raster: " + path);
    RgbImage img(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
            img.r.at(y, x) = raster[i + 0];
            img.g.at(y, x) = raster[i + 1];
            img.b.at(y, x) = raster[i + 2];
        }
    }
    return img;
}

void write_ppm(const std::string& path, const RgbImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write: " + path);
    out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<std::uint8_t> raster(static_cast<std::size_t>(img.width()) * img.height() * 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * img.width() + x) * 3;
            raster[i + 0] = quantize(img.r.at(y, x));
            raster[i + 1] = quantize(img.g.at(y, x));
            raster[i + 2] = quantize(img.b.at(y, x));
        }
    }
    out.write(reinterpret_cast<const char*>(raster.data()),
              static_cast<std::streamsize>(raster.size()));
}

MosaicImage read_cfa_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5") throw DataError("not a binary PGM (P5): " + path);
    int w = 0, h = 0;
    std::vector<std::string> comments;
    pnm_read_dims(in, path, w, h, &comments);

    MosaicImage m;
    bool have_layout = false;
    for (const auto& c : comments) {
        const auto pos = c.find("bayer:");
        if (pos == std::string::npos) continue;
        std::istringstream ts(c.substr(pos + 6));
        std::string token;
        ts >> token;
        if (have_layout) throw DataError("multiple bayer headers in " + path);
        m.layout = layout_from_string(token);
        have_layout = true;
    }
    if (!have_layout) throw DataError("CFA PGM missing '# bayer: <layout>' header: " + path);

    std::vector<std::uint8_t> raster(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!in) throw DataError("truncated PGM raster: " + path);
    m.cfa = PlaneImage(h, w);
    for (std::size_t i = 0; i < raster.size(); ++i) m.cfa.data[i] = raster[i];
    return m;
}

void write_cfa_pgm(const std::string& path, const MosaicImage& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write: " + path);
    out << "P5\n# bayer: " << to_string(m.layout) << "\n"
        << m.cfa.width << " " << m.cfa.height << "\n255\n";
    std::vector<std::uint8_t> raster(m.cfa.size());
    for (std::size_t i = 0; i < raster.size(); ++i) raster[i] = quantize(m.cfa.data[i]);
    out.write(reinterpret_cast<const char*>(raster.data()),
              static_cast<std::streamsize>(raster.size()));
}

RgbImage read_rgb(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") return read_png(path);
    if (ext == "ppm") return read_ppm(path);
    throw DataError("unsupported RGB image extension (want .png or .ppm): " + path);
}

void write_rgb(const std::string& path, const RgbImage& img) {
    const std::string ext = lower_ext(path);
    if (ext == "png") return write_png(path, img);
    if (ext == "ppm") return write_ppm(path, img);
    throw DataError("unsupported RGB image extension (want .png or .ppm): " + path);
}

}  // namespace cbcd
