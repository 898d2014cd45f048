#include "hazelab/nn/reference.hpp"

#include <algorithm>

namespace hazelab::ref {

ScalarField dark_channel(const Image& img, int patch) {
    validate_image(img, "dark_channel input");
    if (patch < 3 || patch % 2 == 0)
        fail(ErrorCode::Usage, "dark_channel: patch must be odd and >= 3");
    const int h = img.height, w = img.width, r = patch / 2;
    ScalarField out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float m = img.at(y, x, 0);
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    int iy = std::clamp(y + dy, 0, h - 1);
                    int ix = std::clamp(x + dx, 0, w - 1);
                    for (int c = 0; c < 3; ++c) m = std::min(m, img.at(iy, ix, c));
                }
            out.at(y, x) = m;
        }
    return out;
}

color::LabImage rgb_to_lab(const Image& img, color::LabMode mode) {
    validate_image(img, "rgb_to_lab input");
    color::LabImage out(img.height, img.width);
    for (size_t p = 0; p < img.pixels(); ++p)
        color::detail::rgb_to_lab_px(img.data.data() + p * 3, out.data.data() + p * 3, mode);
    return out;
}

}  // namespace hazelab::ref
