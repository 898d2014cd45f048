#include "hazelab/colorspace.hpp"

#include <cmath>

#include "hazelab/parallel.hpp"

namespace hazelab::color {

XyzImage rgb_to_xyz(const Image& img) {
    validate_image(img, "rgb_to_xyz input");
    XyzImage out(img.height, img.width);
    parallel_for(img.height, [&](int y) {
        const float* src = img.data.data() + size_t(y) * img.width * 3;
        float* dst = out.data.data() + size_t(y) * img.width * 3;
        for (int x = 0; x < img.width; ++x)
            detail::rgb_to_xyz_px(src + x * 3, dst + x * 3);
    });
    return out;
}

double lab_f(double t, LabMode mode) { return detail::lab_f(t, mode); }

LabImage xyz_to_lab(const XyzImage& img, LabMode mode) {
    // Validate the domain up front so worker threads never throw.
    for (float v : img.data)
        if (!std::isfinite(v) || v < 0.f)
            fail(ErrorCode::Numeric, "xyz_to_lab: XYZ values must be finite and >= 0");
    LabImage out(img.height, img.width);
    parallel_for(img.height, [&](int y) {
        const float* src = img.data.data() + size_t(y) * img.width * 3;
        float* dst = out.data.data() + size_t(y) * img.width * 3;
        for (int x = 0; x < img.width; ++x)
            detail::xyz_to_lab_px(src + x * 3, dst + x * 3, mode);
    });
    return out;
}

LabImage rgb_to_lab(const Image& img, LabMode mode) {
    return xyz_to_lab(rgb_to_xyz(img), mode);
}

}  // namespace hazelab::color
