#include "doctest.h"

#include <png.h>

#include <cmath>
#include <cstdio>

#include "hazelab/error.hpp"
#include "hazelab/png_io.hpp"
#include "hazelab/rng.hpp"

#include "test_util.hpp"

using namespace hazelab;

namespace {

// Writes a PNG with arbitrary color type / bit depth for loader testing.
void write_raw_png(const std::string& path, int w, int h, int bit_depth, int color_type,
                   const std::vector<png_byte>& rowdata) {
    FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, f);
    png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<png_bytep> rows(size_t(h));
    for (int y = 0; y < h; ++y)
        rows[size_t(y)] = const_cast<png_bytep>(rowdata.data() + rowbytes * size_t(y));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

}  // namespace

TEST_CASE("8-bit code values are divided by 255 with no gamma transform") {
    testutil::TempDir dir("png");
    std::vector<png_byte> row = {255, 255, 255, 0, 0, 0, 128, 64, 32};
    write_raw_png(dir.file("p.png"), 3, 1, 8, PNG_COLOR_TYPE_RGB, row);
    Image img = io::load_image(dir.file("p.png"));
    CHECK(img.at(0, 0, 0) == 1.0f);
    CHECK(img.at(0, 0, 1) == 1.0f);
    CHECK(img.at(0, 1, 0) == 0.0f);
    CHECK(img.at(0, 2, 0) == doctest::Approx(128.f / 255.f).epsilon(1e-7));
}

TEST_CASE("16-bit code values are divided by 65535") {
    testutil::TempDir dir("png");
    // Big-endian 16-bit samples: 65535, 0, 32768 for the single RGB pixel.
    std::vector<png_byte> row = {0xff, 0xff, 0x00, 0x00, 0x80, 0x00};
    write_raw_png(dir.file("p16.png"), 1, 1, 16, PNG_COLOR_TYPE_RGB, row);
    Image img = io::load_image(dir.file("p16.png"));
    CHECK(img.at(0, 0, 0) == 1.0f);
    CHECK(img.at(0, 0, 1) == 0.0f);
    CHECK(img.at(0, 0, 2) == doctest::Approx(32768.f / 65535.f).epsilon(1e-7));
}

TEST_CASE("unsupported rasters are rejected with distinct data errors") {
    testutil::TempDir dir("png");
    std::vector<png_byte> gray = {100, 200};
    write_raw_png(dir.file("gray.png"), 2, 1, 8, PNG_COLOR_TYPE_GRAY, gray);
    CHECK_THROWS_WITH_AS(io::load_image(dir.file("gray.png")),
                         doctest::Contains("channel count"), Error);

    try {
        io::load_image(dir.file("missing.png"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Data);
    }

    // RGBA rejected too.
    std::vector<png_byte> rgba = {1, 2, 3, 4};
    write_raw_png(dir.file("rgba.png"), 1, 1, 8, PNG_COLOR_TYPE_RGB_ALPHA, rgba);
    CHECK_THROWS_AS(io::load_image(dir.file("rgba.png")), Error);
}

TEST_CASE("save clamps to [0,1] and rounds to nearest") {
    testutil::TempDir dir("png");
    Image img(1, 2);
    img.at(0, 0, 0) = 1.5f;  // clamps to 255
    img.at(0, 0, 1) = 0.5f;  // round(127.5) = 128
    img.at(0, 0, 2) = 0.f;
    io::save_image(img, dir.file("q.png"));
    Image back = io::load_image(dir.file("q.png"));
    CHECK(back.at(0, 0, 0) == 1.0f);
    CHECK(back.at(0, 0, 1) == doctest::Approx(128.f / 255.f).epsilon(1e-7));
    CHECK(back.at(0, 0, 2) == 0.0f);
}

TEST_CASE("negative values violate the save precondition") {
    testutil::TempDir dir("png");
    Image img(1, 1);
    img.at(0, 0, 0) = -0.1f;
    try {
        io::save_image(img, dir.file("neg.png"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Numeric);
    }
}

TEST_CASE("save/load round trip stays within one quantization half-step") {
    testutil::TempDir dir("png");
    SplitMix64 rng(11);
    Image img = testutil::random_image(rng, 17, 23, 0.f, 1.2f);
    io::save_image(img, dir.file("r.png"));
    Image back = io::load_image(dir.file("r.png"));
    for (size_t i = 0; i < img.data.size(); ++i) {
        float clamped = std::min(1.f, img.data[i]);
        CHECK(std::fabs(back.data[i] - clamped) <= 1.f / 510.f + 1e-6f);
    }
}
