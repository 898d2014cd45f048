#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hazelab/error.hpp"

namespace hazelab {

// Row-major H x W x 3 float raster (R,G,B). Nominal range [0,1]; synthesized
// hazy frames may exceed 1 and stay unclipped until 8-bit export. All
// containers are treated as immutable once constructed; ops return new values.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // height * width * 3

    Image() = default;
    Image(int h, int w, float fill = 0.f)
        : height(h), width(w), data(size_t(h) * size_t(w) * 3, fill) {}

    float& at(int y, int x, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
    float at(int y, int x, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }
    size_t pixels() const { return size_t(height) * size_t(width); }
};

// Row-major H x W float field (depths, dark channels, per-pixel metrics).
struct ScalarField {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // height * width

    ScalarField() = default;
    ScalarField(int h, int w, float fill = 0.f)
        : height(h), width(w), data(size_t(h) * size_t(w), fill) {}

    float& at(int y, int x) { return data[size_t(y) * width + x]; }
    float at(int y, int x) const { return data[size_t(y) * width + x]; }
};

inline bool same_size(const Image& a, const Image& b) {
    return a.height == b.height && a.width == b.width;
}

inline void validate_image(const Image& img, const char* what = "image") {
    if (img.height <= 0 || img.width <= 0 ||
        img.data.size() != size_t(img.height) * size_t(img.width) * 3)
        fail(ErrorCode::Data, std::string(what) + ": data length does not match dimensions");
    for (float v : img.data)
        if (!std::isfinite(v) || v < 0.f)
            fail(ErrorCode::Numeric, std::string(what) + ": values must be finite and >= 0");
}

inline void validate_field(const ScalarField& f, const char* what = "field") {
    if (f.height <= 0 || f.width <= 0 ||
        f.data.size() != size_t(f.height) * size_t(f.width))
        fail(ErrorCode::Data, std::string(what) + ": data length does not match dimensions");
    for (float v : f.data)
        if (!std::isfinite(v))
            fail(ErrorCode::Numeric, std::string(what) + ": values must be finite");
}

}  // namespace hazelab
