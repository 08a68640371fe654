#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "aquaperc/rgb.hpp"

namespace aquaperc {

// Linear-radiance RGB image, float storage, row-major, top row first.
struct ImageF {
    int width{0};
    int height{0};
    std::vector<float> data;  // 3 floats per pixel

    ImageF() = default;
    ImageF(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0.0f) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("ImageF: dimensions must be positive");
    }

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    Rgb at(int x, int y) const {
        const float* p = &data[(static_cast<size_t>(y) * width + x) * 3];
        return {p[0], p[1], p[2]};
    }

    void set(int x, int y, const Rgb& c) {
        float* p = &data[(static_cast<size_t>(y) * width + x) * 3];
        p[0] = static_cast<float>(c.r);
        p[1] = static_cast<float>(c.g);
        p[2] = static_cast<float>(c.b);
    }

    double luminance(int x, int y) const {
        const float* p = &data[(static_cast<size_t>(y) * width + x) * 3];
        return (static_cast<double>(p[0]) + p[1] + p[2]) / 3.0;
    }

    bool same_size(const ImageF& o) const { return width == o.width && height == o.height; }
};

}  // namespace aquaperc
