#include "sigver/imageprep.hpp"

#include <array>
#include <cmath>
#include <cstdint>

namespace sigver {

int otsu_threshold(const GrayImage& img) {
    std::array<std::int64_t, 256> hist{};
    for (float p : img.pixels) {
        int v = static_cast<int>(std::lround(p));
        if (v < 0 || v > 255)
            throw ConfigError("otsu_threshold: raw-stage intensity outside [0,255]");
        hist[v]++;
    }
    const std::int64_t total = static_cast<std::int64_t>(img.size());

    std::int64_t sum_all = 0;
    for (int v = 0; v < 256; ++v)
        sum_all += static_cast<std::int64_t>(v) * hist[v];

    int best_t = -1;
    double best_var = 0.0;
    std::int64_t n0 = 0, s0 = 0;
    for (int t = 0; t < 256; ++t) {
        n0 += hist[t];
        s0 += static_cast<std::int64_t>(t) * hist[t];
        const std::int64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0)
            continue;
        const std::int64_t s1 = sum_all - s0;
        const double mu0 = static_cast<double>(s0) / static_cast<double>(n0);
        const double mu1 = static_cast<double>(s1) / static_cast<double>(n1);
        const double w0 = static_cast<double>(n0) / static_cast<double>(total);
        const double w1 = static_cast<double>(n1) / static_cast<double>(total);
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    if (best_t < 0)
        throw DegenerateImageError("otsu_threshold: constant image, no separating threshold");
    return best_t;
}

GrayImage remove_background(const GrayImage& img, int threshold) {
    GrayImage out = img;
    for (float& p : out.pixels)
        if (p > static_cast<float>(threshold))
            p = 255.0f;
    return out;
}

GrayImage invert(const GrayImage& img) {
    GrayImage out = img;
    for (float& p : out.pixels)
        p = 255.0f - p;
    return out;
}

GrayImage center_on_canvas(const GrayImage& img, int canvas_h, int canvas_w) {
    if (canvas_h < 1 || canvas_w < 1)
        throw ConfigError("center_on_canvas: canvas dimensions must be >= 1");
    if (img.height > canvas_h || img.width > canvas_w)
        throw ShapeError("center_on_canvas: image larger than canvas");

    double mass = 0.0, mr = 0.0, mc = 0.0;
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) {
            const double p = img.at(r, c);
            mass += p;
            mr += p * r;
            mc += p * c;
        }
    if (mass <= 0.0)
        throw DegenerateImageError("center_on_canvas: all-zero image has no center of mass");

    const double com_r = mr / mass;
    const double com_c = mc / mass;
    const int dy = static_cast<int>(std::lround(canvas_h / 2.0 - com_r));
    const int dx = static_cast<int>(std::lround(canvas_w / 2.0 - com_c));

    GrayImage out(canvas_h, canvas_w, 0.0f);
    for (int r = 0; r < img.height; ++r) {
        const int rr = r + dy;
        if (rr < 0 || rr >= canvas_h)
            continue;
        for (int c = 0; c < img.width; ++c) {
            const int cc = c + dx;
            if (cc < 0 || cc >= canvas_w)
                continue;
            out.at(rr, cc) = img.at(r, c);
        }
    }
    return out;
}

GrayImage resize_with_crop(const GrayImage& img, int target_h, int target_w) {
    if (target_h < 1 || target_w < 1)
        throw ConfigError("resize_with_crop: target dimensions must be >= 1");

    const double scale = std::max(static_cast<double>(target_h) / img.height,
                                  static_cast<double>(target_w) / img.width);
    const int scaled_h = std::max(target_h, static_cast<int>(std::lround(img.height * scale)));
    const int scaled_w = std::max(target_w, static_cast<int>(std::lround(img.width * scale)));
    const int off_y = (scaled_h - target_h) / 2;
    const int off_x = (scaled_w - target_w) / 2;

    GrayImage out(target_h, target_w, 0.0f);
    for (int y = 0; y < target_h; ++y) {
        // pixel-center mapping into the source grid
        const double sy = (y + off_y + 0.5) * img.height / scaled_h - 0.5;
        const double syc = std::min(std::max(sy, 0.0), static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(std::floor(syc));
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = syc - y0;
        for (int x = 0; x < target_w; ++x) {
            const double sx = (x + off_x + 0.5) * img.width / scaled_w - 0.5;
            const double sxc = std::min(std::max(sx, 0.0), static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(std::floor(sxc));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sxc - x0;
            const double v = (1.0 - fy) * ((1.0 - fx) * img.at(y0, x0) + fx * img.at(y0, x1)) +
                             fy * ((1.0 - fx) * img.at(y1, x0) + fx * img.at(y1, x1));
            out.at(y, x) = static_cast<float>(v);
        }
    }
    return out;
}

GrayImage normalize_std(const GrayImage& img, double dataset_pixel_std) {
    if (dataset_pixel_std <= 0.0)
        throw ConfigError("normalize_std: dataset_pixel_std must be > 0");
    GrayImage out = img;
    for (float& p : out.pixels)
        p = static_cast<float>(p / dataset_pixel_std);
    return out;
}

double compute_dataset_std(const std::vector<GrayImage>& images) {
    if (images.empty())
        throw ConfigError("compute_dataset_std: empty image collection");
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& img : images) {
        for (float p : img.pixels)
            sum += p;
        n += img.size();
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& img : images)
        for (float p : img.pixels) {
            const double d = p - mean;
            ss += d * d;
        }
    return std::sqrt(ss / static_cast<double>(n));
}

GrayImage preprocess_unnormalized(const GrayImage& img, const PrepConfig& cfg) {
    const int t = otsu_threshold(img);
    GrayImage work = invert(remove_background(img, t));
    if (cfg.mode == PrepMode::CanvasThenResize)
        work = center_on_canvas(work, cfg.canvas_h, cfg.canvas_w);
    return resize_with_crop(work, cfg.target_h, cfg.target_w);
}

GrayImage preprocess(const GrayImage& img, const PrepConfig& cfg) {
    return normalize_std(preprocess_unnormalized(img, cfg), cfg.dataset_pixel_std);
}

} // namespace sigver
