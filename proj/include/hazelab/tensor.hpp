#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace hazelab {

// N x C x H x W float array, row-major, the carrier for network activations
// and parameters.
struct Tensor4 {
    std::array<int, 4> shape{0, 0, 0, 0};  // (batch, channels, height, width)
    std::vector<float> data;

    Tensor4() = default;
    Tensor4(int n, int c, int h, int w, float fill = 0.f)
        : shape{n, c, h, w}, data(size_t(n) * c * h * w, fill) {}

    size_t numel() const {
        return size_t(shape[0]) * shape[1] * shape[2] * shape[3];
    }
    float& at(int n, int c, int y, int x) {
        return data[((size_t(n) * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }
    float at(int n, int c, int y, int x) const {
        return data[((size_t(n) * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }
};

}  // namespace hazelab
