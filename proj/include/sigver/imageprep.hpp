#ifndef SIGVER_IMAGEPREP_HPP
#define SIGVER_IMAGEPREP_HPP

#include <vector>

#include "sigver/image.hpp"

namespace sigver {

enum class PrepMode {
    ResizeOnly,      // bilinear resize with aspect-preserving center crop
    CanvasThenResize // center on a fixed canvas first, then resize
};

struct PrepConfig {
    PrepMode mode = PrepMode::CanvasThenResize;
    int canvas_h = 840;
    int canvas_w = 1360;
    int target_h = 155;
    int target_w = 220;
    double dataset_pixel_std = 1.0; // measured on the development set
};

// Threshold in [0,255] maximizing between-class variance of the intensity
// histogram. Lowest threshold wins on ties. Throws DegenerateImageError for
// constant images.
int otsu_threshold(const GrayImage& img);

// Pixels with intensity > t become white (255); pixels <= t are kept.
GrayImage remove_background(const GrayImage& img, int threshold);

// 255 - I(i,j); background becomes 0.
GrayImage invert(const GrayImage& img);

// Translate the (already inverted) signature so its intensity-weighted center
// of mass lands on the canvas center. Pixels shifted past the border are
// clipped. Throws DegenerateImageError for all-zero input and ShapeError when
// the image exceeds the canvas.
GrayImage center_on_canvas(const GrayImage& img, int canvas_h, int canvas_w);

// Bilinear resize preserving aspect ratio: scale to cover the target, then
// center-crop the excess in the longer dimension.
GrayImage resize_with_crop(const GrayImage& img, int target_h, int target_w);

// Divide every pixel by the dataset standard deviation. No mean subtraction,
// so background stays exactly 0.
GrayImage normalize_std(const GrayImage& img, double dataset_pixel_std);

// Population standard deviation over the union of all pixels.
double compute_dataset_std(const std::vector<GrayImage>& images);

// Full pipeline up to (not including) std normalization:
// otsu -> remove_background -> invert -> [center_on_canvas] -> resize.
// This is the stage at which the dataset std is measured.
GrayImage preprocess_unnormalized(const GrayImage& img, const PrepConfig& cfg);

// Full pipeline including division by cfg.dataset_pixel_std.
GrayImage preprocess(const GrayImage& img, const PrepConfig& cfg);

} // namespace sigver

#endif
