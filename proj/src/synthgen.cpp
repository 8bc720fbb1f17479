#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "sigver/image.hpp"
#include "sigver/png_io.hpp"
#include "sigver/protocol.hpp"
#include "sigver/rng.hpp"

namespace sigver {

namespace {

struct Stroke {
    double px[4], py[4]; // cubic control points, pixel units
    double thickness;
    double darkness;
};

struct StrokeModel {
    std::vector<Stroke> strokes;
};

StrokeModel draw_model(Rng& rng, int height, int width) {
    StrokeModel m;
    const double mx = 0.14 * width, my = 0.14 * height;
    const int n = 3 + (int)rng.below(3);
    for (int s = 0; s < n; s++) {
        Stroke st;
        for (int k = 0; k < 4; k++) {
            st.px[k] = rng.uniform(mx, width - mx);
            st.py[k] = rng.uniform(my, height - my);
        }
        st.thickness = rng.uniform(2.2, 4.2);
        st.darkness = rng.uniform(0.75, 0.95);
        m.strokes.push_back(st);
    }
    return m;
}

// Jitter magnitudes are what separate the sample kinds: genuine wobble is
// small, a skilled forgery re-draws the same strokes with visibly larger
// error (misjudged slant, size, pen pressure), and an unrelated model is far
// away from both.
StrokeModel jitter_model(const StrokeModel& base, Rng& rng, double sigma_pt, double sigma_thick,
                         double sigma_shift, double sigma_scale, double sigma_shear) {
    StrokeModel m = base;
    double cx = 0.0, cy = 0.0;
    int np = 0;
    for (const Stroke& st : m.strokes)
        for (int k = 0; k < 4; k++) {
            cx += st.px[k];
            cy += st.py[k];
            np++;
        }
    cx /= np;
    cy /= np;
    const double dx = rng.normal(0.0, sigma_shift);
    const double dy = rng.normal(0.0, sigma_shift);
    const double scale = 1.0 + rng.normal(0.0, sigma_scale);
    const double shear = rng.normal(0.0, sigma_shear);
    for (Stroke& st : m.strokes) {
        for (int k = 0; k < 4; k++) {
            // whole-signature affine error first, then per-point wobble
            const double rx = st.px[k] - cx, ry = st.py[k] - cy;
            st.px[k] = cx + scale * (rx + shear * ry) + rng.normal(0.0, sigma_pt) + dx;
            st.py[k] = cy + scale * ry + rng.normal(0.0, sigma_pt) + dy;
        }
        st.thickness = std::max(1.2, st.thickness * (1.0 + rng.normal(0.0, sigma_thick)));
        st.darkness = std::clamp(st.darkness + rng.normal(0.0, 0.02), 0.5, 1.0);
    }
    return m;
}

GrayImage rasterize(const StrokeModel& m, int height, int width) {
    GrayImage img(height, width);
    std::vector<float> ink((std::size_t)height * width, 0.0f);
    const int samples = 400;
    for (const Stroke& st : m.strokes) {
        const double r = st.thickness / 2.0;
        const int reach = (int)std::ceil(r + 1.0);
        for (int i = 0; i <= samples; i++) {
            double t = (double)i / samples;
            double u = 1.0 - t;
            double bx = u * u * u * st.px[0] + 3 * u * u * t * st.px[1] +
                        3 * u * t * t * st.px[2] + t * t * t * st.px[3];
            double by = u * u * u * st.py[0] + 3 * u * u * t * st.py[1] +
                        3 * u * t * t * st.py[2] + t * t * t * st.py[3];
            int cx = (int)std::lround(bx), cy = (int)std::lround(by);
            for (int y = cy - reach; y <= cy + reach; y++) {
                if (y < 0 || y >= height) continue;
                for (int x = cx - reach; x <= cx + reach; x++) {
                    if (x < 0 || x >= width) continue;
                    double ddx = x - bx, ddy = y - by;
                    double dist = std::sqrt(ddx * ddx + ddy * ddy);
                    // 1px feathered disc around the curve sample.
                    double cov = std::clamp(r + 0.5 - dist, 0.0, 1.0);
                    float v = (float)(cov * st.darkness);
                    float& cell = ink[(std::size_t)y * width + x];
                    if (v > cell) cell = v;
                }
            }
        }
    }
    for (int i = 0; i < height * width; i++)
        img.pixels[i] = 255.0f * (1.0f - ink[i]);
    return img;
}

std::string user_dir(int uid) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "user%03d", uid);
    return buf;
}

} // namespace

Corpus generate_synthetic_corpus(const std::string& root, const SynthConfig& cfg) {
    if (cfg.n_users < 2) throw ConfigError("synthetic corpus needs at least 2 users");
    if (cfg.n_genuine < 2) throw ConfigError("synthetic corpus needs at least 2 genuine per user");
    if (cfg.n_skilled < 0 || cfg.n_simple < 0)
        throw ConfigError("forgery counts must be nonnegative");
    if (cfg.height < 32 || cfg.width < 32)
        throw ConfigError("synthetic image size is degenerate (minimum 32x32)");

    std::filesystem::create_directories(root);
    Corpus corpus;
    corpus.root = root;

    // Genuine jitter vs skilled jitter; point/shift sigmas are pixels at
    // generation scale, scale/shear are relative.
    const double g_pt = 0.7, g_thick = 0.05, g_shift = 1.0, g_scale = 0.02, g_shear = 0.02;
    const double s_pt = 4.5, s_thick = 0.28, s_shift = 3.0, s_scale = 0.10, s_shear = 0.12;

    for (int uid = 1; uid <= cfg.n_users; uid++) {
        CorpusUser user;
        user.user_id = (std::uint32_t)uid;
        const std::string dir = user_dir(uid);
        std::filesystem::create_directories(std::filesystem::path(root) / dir);

        Rng model_rng(derive_seed(cfg.seed, "user-model", (std::uint64_t)uid));
        StrokeModel base = draw_model(model_rng, cfg.height, cfg.width);

        char name[64];
        for (int i = 1; i <= cfg.n_genuine; i++) {
            Rng jr(derive_seed(cfg.seed, "genuine", ((std::uint64_t)uid << 20) | (std::uint64_t)i));
            GrayImage img = rasterize(jitter_model(base, jr, g_pt, g_thick, g_shift, g_scale, g_shear), cfg.height,
                                      cfg.width);
            std::snprintf(name, sizeof name, "%s/genuine_%02d.png", dir.c_str(), i);
            save_png_gray((std::filesystem::path(root) / name).string(), img);
            user.genuine.push_back(name);
        }
        for (int i = 1; i <= cfg.n_skilled; i++) {
            Rng jr(derive_seed(cfg.seed, "skilled", ((std::uint64_t)uid << 20) | (std::uint64_t)i));
            GrayImage img = rasterize(jitter_model(base, jr, s_pt, s_thick, s_shift, s_scale, s_shear), cfg.height,
                                      cfg.width);
            std::snprintf(name, sizeof name, "%s/skilled_%02d.png", dir.c_str(), i);
            save_png_gray((std::filesystem::path(root) / name).string(), img);
            user.skilled.push_back(name);
        }
        for (int i = 1; i <= cfg.n_simple; i++) {
            // A simple forger does not know the signature: unrelated strokes.
            Rng jr(derive_seed(cfg.seed, "simple", ((std::uint64_t)uid << 20) | (std::uint64_t)i));
            GrayImage img = rasterize(draw_model(jr, cfg.height, cfg.width), cfg.height,
                                      cfg.width);
            std::snprintf(name, sizeof name, "%s/simple_%02d.png", dir.c_str(), i);
            save_png_gray((std::filesystem::path(root) / name).string(), img);
            user.simple.push_back(name);
        }
        corpus.users.push_back(std::move(user));
    }

    write_manifest((std::filesystem::path(root) / "manifest.txt").string(), corpus);
    return corpus;
}

} // namespace sigver
