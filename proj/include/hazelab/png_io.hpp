#pragma once

#include <string>

#include "hazelab/image.hpp"

namespace hazelab::io {

// Loads an 8- or 16-bit RGB PNG. Integer code values are divided by their
// maximum (255 or 65535); no gamma transform is applied — the pipeline works
// on stored code values throughout. Other bit depths / channel counts are
// rejected with a data error.
Image load_image(const std::string& path);

// Clamps to [0,1], quantizes round-to-nearest to 8 bits and writes an RGB PNG.
// Negative or nonfinite input values are a precondition violation.
void save_image(const Image& img, const std::string& path);

}  // namespace hazelab::io
