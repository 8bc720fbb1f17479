#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "sigver/imageprep.hpp"
#include "sigver/png_io.hpp"
#include "sigver/rng.hpp"

using namespace sigver;

namespace {

GrayImage random_raw(int h, int w, Rng& rng) {
    GrayImage img(h, w);
    for (float& p : img.pixels) p = (float)rng.below(256);
    return img;
}

void center_of_mass(const GrayImage& img, double& r, double& c) {
    double m = 0.0, mr = 0.0, mc = 0.0;
    for (int y = 0; y < img.height; y++)
        for (int x = 0; x < img.width; x++) {
            const double p = img.at(y, x);
            m += p;
            mr += p * y;
            mc += p * x;
        }
    r = mr / m;
    c = mc / m;
}

} // namespace

TEST_CASE("otsu separates a two-level image") {
    GrayImage img(8, 8);
    for (int i = 0; i < 64; i++) img.pixels[(std::size_t)i] = i < 32 ? 50.0f : 200.0f;
    const int t = otsu_threshold(img);
    CHECK(t >= 50);
    CHECK(t < 200);
}

TEST_CASE("otsu rejects constant images") {
    GrayImage img(4, 4, 128.0f);
    CHECK_THROWS_AS(otsu_threshold(img), DegenerateImageError);
}

TEST_CASE("otsu ties resolve to the lowest threshold") {
    // {0, 255} pixels: every t in [0, 254] gives the same split.
    GrayImage img(2, 2);
    img.pixels = {0.0f, 0.0f, 255.0f, 255.0f};
    CHECK(otsu_threshold(img) == 0);
}

TEST_CASE("otsu equals the exhaustive-search oracle on random images") {
    Rng rng(derive_seed(11, "otsu-oracle"));
    for (int k = 0; k < 100; k++) {
        GrayImage img = random_raw(16, 16, rng);
        const int expect = oracles::exhaustive_otsu(img);
        if (expect < 0) {
            CHECK_THROWS_AS(otsu_threshold(img), DegenerateImageError);
        } else {
            CHECK(otsu_threshold(img) == expect);
        }
    }
}

TEST_CASE("remove_background whitens above the threshold only") {
    GrayImage img(1, 3);
    img.pixels = {250.0f, 100.0f, 128.0f};
    GrayImage out = remove_background(img, 128);
    CHECK(out.pixels[0] == 255.0f);
    CHECK(out.pixels[1] == 100.0f);
    CHECK(out.pixels[2] == 128.0f); // at the threshold: kept
}

TEST_CASE("remove_background with threshold 255 changes nothing") {
    Rng rng(3);
    GrayImage img = random_raw(9, 7, rng);
    GrayImage out = remove_background(img, 255);
    CHECK(out.pixels == img.pixels);
}

TEST_CASE("invert flips extremes and is an involution") {
    GrayImage img(1, 2);
    img.pixels = {255.0f, 0.0f};
    GrayImage inv = invert(img);
    CHECK(inv.pixels[0] == 0.0f);
    CHECK(inv.pixels[1] == 255.0f);

    Rng rng(4);
    GrayImage rand = random_raw(12, 15, rng);
    CHECK(invert(invert(rand)).pixels == rand.pixels);
}

TEST_CASE("center_on_canvas places a point mass at the canvas center") {
    GrayImage img(5, 7);
    img.at(1, 2) = 200.0f;
    GrayImage out = center_on_canvas(img, 32, 44);
    CHECK(out.at(16, 22) == 200.0f);
    double total = 0.0;
    for (float p : out.pixels) total += p;
    CHECK(total == 200.0);
}

TEST_CASE("center_on_canvas is the identity for a centered image") {
    GrayImage img(20, 20);
    img.at(9, 9) = 100.0f;
    img.at(11, 11) = 100.0f; // center of mass exactly (10, 10)
    GrayImage out = center_on_canvas(img, 20, 20);
    CHECK(out.pixels == img.pixels);
}

TEST_CASE("center_on_canvas brings the center of mass within a pixel of center") {
    Rng rng(5);
    for (int k = 0; k < 20; k++) {
        GrayImage img(30, 40);
        for (int i = 0; i < 25; i++) {
            const int y = (int)rng.below(30), x = (int)rng.below(40);
            img.at(y, x) = (float)(1 + rng.below(255));
        }
        GrayImage out = center_on_canvas(img, 100, 120);
        double r, c;
        center_of_mass(out, r, c);
        CHECK(std::fabs(r - 50.0) <= 1.0);
        CHECK(std::fabs(c - 60.0) <= 1.0);
    }
}

TEST_CASE("center_on_canvas error cases") {
    GrayImage zero(6, 6);
    CHECK_THROWS_AS(center_on_canvas(zero, 20, 20), DegenerateImageError);
    GrayImage big(50, 50, 10.0f);
    CHECK_THROWS_AS(center_on_canvas(big, 40, 60), ShapeError);
}

TEST_CASE("resize_with_crop is the identity at the target size") {
    Rng rng(6);
    GrayImage img = random_raw(155, 220, rng);
    GrayImage out = resize_with_crop(img, 155, 220);
    CHECK(out.pixels == img.pixels);
}

TEST_CASE("resize_with_crop at exactly 2x matches block-average bilinear sampling") {
    Rng rng(7);
    GrayImage img = random_raw(310, 440, rng);
    GrayImage out = resize_with_crop(img, 155, 220);
    REQUIRE(out.height == 155);
    REQUIRE(out.width == 220);
    // At a clean 2x downscale every pixel-center sample lands halfway between
    // four source pixels, so bilinear reduces to the 2x2 average.
    double worst = 0.0;
    for (int y = 0; y < 155; y++)
        for (int x = 0; x < 220; x++) {
            const double expect = (img.at(2 * y, 2 * x) + img.at(2 * y, 2 * x + 1) +
                                   img.at(2 * y + 1, 2 * x) + img.at(2 * y + 1, 2 * x + 1)) /
                                  4.0;
            worst = std::max(worst, std::fabs(expect - out.at(y, x)));
        }
    CHECK(worst < 1e-4);
}

TEST_CASE("resize_with_crop center-crops the longer dimension") {
    GrayImage img(100, 400);
    for (int y = 0; y < 100; y++)
        for (int x = 0; x < 400; x++) img.at(y, x) = (float)((y * 7 + x * 13) % 256);
    GrayImage out = resize_with_crop(img, 100, 200);
    REQUIRE(out.height == 100);
    REQUIRE(out.width == 200);
    // scale 1.0 in height, so width keeps the middle 200 columns
    for (int y = 0; y < 100; y++)
        for (int x = 0; x < 200; x++) CHECK(out.at(y, x) == img.at(y, x + 100));
}

TEST_CASE("resize_with_crop validates the target") {
    GrayImage img(10, 10, 1.0f);
    CHECK_THROWS_AS(resize_with_crop(img, 0, 5), ConfigError);
}

TEST_CASE("normalize_std divides and keeps zero at zero") {
    GrayImage img(1, 3);
    img.pixels = {0.0f, 255.0f, 51.0f};
    GrayImage out = normalize_std(img, 51.0);
    CHECK(out.pixels[0] == 0.0f);
    CHECK(out.pixels[1] == doctest::Approx(5.0));
    CHECK(out.pixels[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(normalize_std(img, 0.0), ConfigError);
}

TEST_CASE("normalizing by the corpus std gives unit std") {
    Rng rng(8);
    std::vector<GrayImage> corpus;
    for (int i = 0; i < 5; i++) corpus.push_back(random_raw(20, 30, rng));
    const double sd = compute_dataset_std(corpus);
    std::vector<GrayImage> scaled;
    for (const GrayImage& img : corpus) scaled.push_back(normalize_std(img, sd));
    CHECK(compute_dataset_std(scaled) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("compute_dataset_std hand cases and oracle") {
    GrayImage two(1, 2);
    two.pixels = {0.0f, 2.0f};
    CHECK(compute_dataset_std({two}) == doctest::Approx(1.0));

    GrayImage flat(3, 3, 77.0f);
    CHECK(compute_dataset_std({flat}) == 0.0);

    CHECK_THROWS_AS(compute_dataset_std({}), ConfigError);

    // two-pass long-double reference over the union of pixels
    Rng rng(9);
    std::vector<GrayImage> corpus;
    for (int i = 0; i < 4; i++) corpus.push_back(random_raw(11, 13, rng));
    long double sum = 0.0L;
    long n = 0;
    for (const auto& img : corpus)
        for (float p : img.pixels) {
            sum += p;
            n++;
        }
    const long double mean = sum / n;
    long double ss = 0.0L;
    for (const auto& img : corpus)
        for (float p : img.pixels) ss += (p - mean) * (p - mean);
    const double expect = (double)std::sqrt(ss / n);
    CHECK(compute_dataset_std(corpus) == doctest::Approx(expect).epsilon(1e-12));
}

namespace {

// A dark scribble on white: enough structure for otsu and centering.
GrayImage fake_signature(int h, int w, Rng& rng) {
    GrayImage img(h, w, 235.0f);
    int y = h / 2, x = w / 8;
    for (int step = 0; step < 6 * w; step++) {
        const int yy = std::clamp(y, 1, h - 2), xx = std::clamp(x, 1, w - 2);
        for (int dy = -1; dy <= 1; dy++)
            for (int dx = -1; dx <= 1; dx++) img.at(yy + dy, xx + dx) = (float)(10 + rng.below(40));
        y += (int)rng.below(3) - 1;
        x += (int)rng.below(2);
        if (x >= w - 1) x = w / 8;
    }
    return img;
}

} // namespace

TEST_CASE("preprocess produces the canonical shape with zero background") {
    Rng rng(10);
    GrayImage sig = fake_signature(200, 300, rng);
    PrepConfig cfg; // canonical: canvas 840x1360 then 155x220
    cfg.dataset_pixel_std = 40.0;
    GrayImage out = preprocess(sig, cfg);
    CHECK(out.height == 155);
    CHECK(out.width == 220);
    float mn = out.pixels[0], mx = out.pixels[0];
    for (float p : out.pixels) {
        mn = std::min(mn, p);
        mx = std::max(mx, p);
    }
    CHECK(mn == 0.0f);
    CHECK(mx > 0.0f);
}

TEST_CASE("preprocess rejects a blank page") {
    GrayImage blank(60, 80, 255.0f);
    PrepConfig cfg;
    CHECK_THROWS_AS(preprocess(blank, cfg), DegenerateImageError);
}

TEST_CASE("preprocess is deterministic") {
    Rng rng(12);
    GrayImage sig = fake_signature(120, 180, rng);
    PrepConfig cfg;
    cfg.mode = PrepMode::ResizeOnly;
    cfg.target_h = 55;
    cfg.target_w = 80;
    cfg.dataset_pixel_std = 33.0;
    GrayImage a = preprocess(sig, cfg);
    GrayImage b = preprocess(sig, cfg);
    CHECK(a.pixels == b.pixels);
}

TEST_CASE("png round-trip preserves 8-bit grayscale exactly") {
    namespace fs = std::filesystem;
    Rng rng(13);
    GrayImage img = random_raw(37, 53, rng);
    const fs::path dir = fs::temp_directory_path() / "sigver_png_rt";
    fs::create_directories(dir);
    const std::string path = (dir / "rt.png").string();
    save_png_gray(path, img);
    GrayImage back = load_png_gray(path);
    REQUIRE(back.height == img.height);
    REQUIRE(back.width == img.width);
    CHECK(back.pixels == img.pixels);
    fs::remove_all(dir);
}

TEST_CASE("png loader reports missing files") {
    CHECK_THROWS_AS(load_png_gray("/nonexistent/sigver/file.png"), IoError);
}
