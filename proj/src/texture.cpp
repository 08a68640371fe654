#include "aquaperc/texture.hpp"

#include <cmath>

#include "aquaperc/rng.hpp"

namespace aquaperc::texture {

namespace {

double cell_value(int64_t ix, int64_t iy, uint64_t salt) {
    uint64_t h = splitmix64(static_cast<uint64_t>(ix) * 0x9e3779b97f4a7c15ULL ^
                            static_cast<uint64_t>(iy) * 0xc2b2ae3d27d4eb4fULL ^ salt);
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Smooth value noise in [0, 1], lattice spacing 1.
double value_noise(double x, double y, uint64_t salt) {
    double fx = std::floor(x), fy = std::floor(y);
    int64_t ix = static_cast<int64_t>(fx), iy = static_cast<int64_t>(fy);
    double tx = smoothstep(x - fx), ty = smoothstep(y - fy);
    double v00 = cell_value(ix, iy, salt), v10 = cell_value(ix + 1, iy, salt);
    double v01 = cell_value(ix, iy + 1, salt), v11 = cell_value(ix + 1, iy + 1, salt);
    double a = v00 + tx * (v10 - v00);
    double b = v01 + tx * (v11 - v01);
    return a + ty * (b - a);
}

double fbm(double x, double y, int octaves, uint64_t salt) {
    double sum = 0.0, amp = 0.5, freq = 1.0, norm = 0.0;
    for (int i = 0; i < octaves; ++i) {
        sum += amp * value_noise(x * freq, y * freq, salt + i * 101);
        norm += amp;
        amp *= 0.5;
        freq *= 2.1;
    }
    return sum / norm;
}

Rgb hull_albedo(double u, double v) {
    // Dull red paint with gentle large-scale mottling.
    double mottle = fbm(u * 0.8, v * 0.8, 3, 11);
    Rgb base{0.52 + 0.10 * (mottle - 0.5), 0.11 + 0.04 * (mottle - 0.5),
             0.09 + 0.03 * (mottle - 0.5)};
    // Sparse peel patches: thresholded coarse noise, soft edge.
    double peel = fbm(u * 1.6 + 40.0, v * 1.6 - 17.0, 2, 23);
    double edge = std::clamp((peel - 0.62) / 0.06, 0.0, 1.0);
    if (edge > 0.0) {
        double rough = 0.85 + 0.3 * (value_noise(u * 14.0, v * 14.0, 37) - 0.5);
        Rgb peel_color{0.58 * rough, 0.55 * rough, 0.50 * rough};
        base = base * (1.0 - edge) + peel_color * edge;
    }
    return base;
}

Rgb seabed_albedo(double u, double v) {
    // Sand / rock / algae mix with high-frequency detail.
    double zones = fbm(u * 0.9, v * 0.9, 3, 53);
    double detail = fbm(u * 7.0, v * 7.0, 5, 67);
    double ripples = 0.5 + 0.5 * std::sin(u * 9.0 + 3.0 * fbm(u * 1.3, v * 1.3, 2, 71));
    Rgb sand{0.58, 0.50, 0.34};
    Rgb rock{0.33, 0.31, 0.29};
    Rgb algae{0.16, 0.30, 0.15};
    Rgb base = sand * zones + rock * (1.0 - zones);
    double algae_mask = std::clamp((fbm(u * 2.2 - 9.0, v * 2.2 + 5.0, 3, 83) - 0.55) / 0.12, 0.0, 1.0);
    base = base * (1.0 - algae_mask) + algae * algae_mask;
    double shade = 0.55 + 0.65 * detail;
    base *= shade * (0.9 + 0.2 * ripples);
    return {std::clamp(base.r, 0.02, 0.95), std::clamp(base.g, 0.02, 0.95),
            std::clamp(base.b, 0.02, 0.95)};
}

}  // namespace

TextureId texture_from_name(const std::string& name) {
    if (name == "hull") return TextureId::hull;
    if (name == "seabed") return TextureId::seabed;
    throw std::invalid_argument("unknown texture: " + name);
}

std::string texture_name(TextureId id) { return id == TextureId::hull ? "hull" : "seabed"; }

Rgb albedo(TextureId id, double u, double v) {
    return id == TextureId::hull ? hull_albedo(u, v) : seabed_albedo(u, v);
}

}  // namespace aquaperc::texture
