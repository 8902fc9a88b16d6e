#include "morphforge/png_io.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/util.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <vector>

namespace morphforge {

namespace {

struct MemReader {
    const uint8_t* data;
    size_t size;
    size_t pos;
};

void read_callback(png_structp png, png_bytep out, png_size_t count) {
    auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
    if (r->pos + count > r->size) {
        png_error(png, "unexpected end of PNG data");
        return;
    }
    std::memcpy(out, r->data + r->pos, count);
    r->pos += count;
}

void write_callback(png_structp png, png_bytep data, png_size_t count) {
    auto* buf = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
    buf->insert(buf->end(), data, data + count);
}

void flush_callback(png_structp) {}

} // namespace

FaceImage load_image(const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = read_binary_file(path);
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw ParseError("not a PNG file: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ParseError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ParseError("png_create_info_struct failed");
    }

    std::vector<uint8_t> raw;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("PNG decode failure: " + path.string());
    }

    MemReader reader{bytes.data(), bytes.size(), 0};
    png_set_read_fn(png, &reader, read_callback);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const size_t row_bytes = png_get_rowbytes(png, info);
    raw.resize(row_bytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (row_bytes < static_cast<size_t>(w) * 3)
        throw ParseError("PNG row size mismatch: " + path.string());

    FaceImage img(static_cast<int>(w), static_cast<int>(h));
    for (png_uint_32 y = 0; y < h; ++y) {
        const uint8_t* row = raw.data() + y * row_bytes;
        for (png_uint_32 x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                img.at(static_cast<int>(x), static_cast<int>(y), c) = row[x * 3 + c] / 255.0;
            }
        }
    }
    validate_face_image(img);
    return img;
}

void save_image(const FaceImage& img, const std::filesystem::path& path) {
    validate_face_image(img);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    std::vector<uint8_t> out;
    std::vector<uint8_t> raw(static_cast<size_t>(img.width) * img.height * 3);
    std::vector<png_bytep> rows(img.height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encode failure: " + path.string());
    }

    png_set_write_fn(png, &out, write_callback, flush_callback);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);

    for (int y = 0; y < img.height; ++y) {
        uint8_t* row = raw.data() + static_cast<size_t>(y) * img.width * 3;
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = img.at(x, y, c);
                row[x * 3 + c] = static_cast<uint8_t>(std::lround(v * 255.0));
            }
        }
        rows[y] = row;
    }
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);

    atomic_write_file(path, out.data(), out.size());
}

} // namespace morphforge
