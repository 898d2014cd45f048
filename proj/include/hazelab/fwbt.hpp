#pragma once

// FWBT tensor container.
//
// Layout: magic "FWBT" (4 bytes) | version byte = 1 | dtype byte = 0
// (float32 little-endian) | rank byte in {2,3,4} | rank x u32 little-endian
// dims | row-major float32 payload. Images are stored rank-3 as (H, W, 3),
// scalar fields rank-2 as (H, W), network tensors rank-4 as (N, C, H, W).
// Round trips are bit-exact.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hazelab/image.hpp"
#include "hazelab/tensor.hpp"

namespace hazelab::fwbt {

struct Payload {
    int rank = 0;
    std::array<uint32_t, 4> dims{0, 0, 0, 0};
    std::vector<float> data;
};

// Rejects empty dims, rank outside {2,3,4}, and nonfinite values.
void write(const std::string& path, const std::vector<uint32_t>& dims,
           const float* data, size_t count);
Payload read(const std::string& path);

void write_field(const std::string& path, const ScalarField& f);
void write_image(const std::string& path, const Image& img);
void write_tensor(const std::string& path, const Tensor4& t);

ScalarField read_field(const std::string& path);   // requires rank 2
Image read_image(const std::string& path);         // requires rank 3, dim2 == 3
Tensor4 read_tensor(const std::string& path);      // requires rank 4

}  // namespace hazelab::fwbt
