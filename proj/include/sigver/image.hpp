#ifndef SIGVER_IMAGE_HPP
#define SIGVER_IMAGE_HPP

#include <cstddef>
#include <vector>

#include "sigver/error.hpp"

namespace sigver {

// 2-D grayscale raster. Raw-stage images hold integer intensities in [0,255]
// (stored as float); after normalization the values are arbitrary reals.
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<float> pixels; // row-major, height * width

    GrayImage() = default;
    GrayImage(int h, int w, float fill = 0.0f) : height(h), width(w) {
        if (h < 1 || w < 1)
            throw ConfigError("GrayImage: dimensions must be >= 1");
        pixels.assign(static_cast<std::size_t>(h) * w, fill);
    }

    float& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    float at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
    std::size_t size() const { return pixels.size(); }
};

} // namespace sigver

#endif
