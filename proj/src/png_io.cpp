#include "hazelab/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "hazelab/error.hpp"

namespace hazelab::io {

namespace {

struct FileCloser {
    FILE* f = nullptr;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

}  // namespace

Image load_image(const std::string& path) {
    FileCloser fc{std::fopen(path.c_str(), "rb")};
    if (!fc.f) fail(ErrorCode::Data, "png: cannot open: " + path);

    png_byte sig[8];
    if (std::fread(sig, 1, 8, fc.f) != 8 || png_sig_cmp(sig, 0, 8))
        fail(ErrorCode::Data, "png: not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Data, "png: allocation failure");
    }

    int width = 0, height = 0, bit_depth = 0, color_type = 0;
    std::vector<png_byte> raw;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Data, "png: decode error: " + path);
    }
    png_init_io(png, fc.f);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    width = int(png_get_image_width(png, info));
    height = int(png_get_image_height(png, info));
    bit_depth = png_get_bit_depth(png, info);
    color_type = png_get_color_type(png, info);

    if (color_type != PNG_COLOR_TYPE_RGB) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Data, "png: unsupported channel count (need 3-channel RGB): " + path);
    }
    if (bit_depth != 8 && bit_depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Data, "png: unsupported bit depth (need 8 or 16): " + path);
    }

    size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * size_t(height));
    rows.resize(size_t(height));
    for (int y = 0; y < height; ++y) rows[size_t(y)] = raw.data() + rowbytes * size_t(y);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Data, "png: decode error: " + path);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(height, width);
    if (bit_depth == 8) {
        for (int y = 0; y < height; ++y) {
            const png_byte* r = rows[size_t(y)];
            for (int x = 0; x < width * 3; ++x)
                img.data[(size_t(y) * width * 3) + size_t(x)] = float(r[x]) / 255.f;
        }
    } else {
        // PNG stores 16-bit samples big-endian.
        for (int y = 0; y < height; ++y) {
            const png_byte* r = rows[size_t(y)];
            for (int x = 0; x < width * 3; ++x) {
                unsigned v = (unsigned(r[2 * x]) << 8) | unsigned(r[2 * x + 1]);
                img.data[(size_t(y) * width * 3) + size_t(x)] = float(v) / 65535.f;
            }
        }
    }
    return img;
}

void save_image(const Image& img, const std::string& path) {
    validate_image(img, "save_image input");

    std::vector<png_byte> raw(size_t(img.height) * size_t(img.width) * 3);
    for (size_t i = 0; i < img.data.size(); ++i) {
        float v = img.data[i];
        if (v < 0.f) v = 0.f;
        if (v > 1.f) v = 1.f;
        raw[i] = png_byte(std::lround(v * 255.f));
    }
    std::vector<png_bytep> rows(size_t(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[size_t(y)] = raw.data() + size_t(y) * size_t(img.width) * 3;

    FileCloser fc{std::fopen(path.c_str(), "wb")};
    if (!fc.f) fail(ErrorCode::Data, "png: cannot open for write: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Data, "png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Data, "png: encode error: " + path);
    }
    png_init_io(png, fc.f);
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace hazelab::io
