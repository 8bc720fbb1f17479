#ifndef SIGVER_PNG_IO_HPP
#define SIGVER_PNG_IO_HPP

#include <string>

#include "sigver/image.hpp"

namespace sigver {

// Load a PNG as 8-bit grayscale (palette/rgb/alpha inputs are converted).
GrayImage load_png_gray(const std::string& path);

// Write a raw-stage image (values in [0,255]) as an 8-bit grayscale PNG.
void save_png_gray(const std::string& path, const GrayImage& img);

} // namespace sigver

#endif
