#pragma once

#include <algorithm>
#include <cmath>

namespace aquaperc {

// Channel-wise triple used for radiance, coefficients (1/m) and ratios.
struct Rgb {
    double r{0.0}, g{0.0}, b{0.0};

    constexpr Rgb() = default;
    constexpr Rgb(double rr, double gg, double bb) : r(rr), g(gg), b(bb) {}
    explicit constexpr Rgb(double v) : r(v), g(v), b(v) {}

    Rgb& operator+=(const Rgb& o) { r += o.r; g += o.g; b += o.b; return *this; }
    Rgb& operator-=(const Rgb& o) { r -= o.r; g -= o.g; b -= o.b; return *this; }
    Rgb& operator*=(const Rgb& o) { r *= o.r; g *= o.g; b *= o.b; return *this; }
    Rgb& operator*=(double s) { r *= s; g *= s; b *= s; return *this; }
    Rgb& operator/=(double s) { r /= s; g /= s; b /= s; return *this; }

    friend Rgb operator+(Rgb a, const Rgb& b) { return a += b; }
    friend Rgb operator-(Rgb a, const Rgb& b) { return a -= b; }
    friend Rgb operator*(Rgb a, const Rgb& b) { return a *= b; }
    friend Rgb operator*(Rgb a, double s) { return a *= s; }
    friend Rgb operator*(double s, Rgb a) { return a *= s; }
    friend Rgb operator/(Rgb a, double s) { return a /= s; }
    friend Rgb operator/(Rgb a, const Rgb& b) { return {a.r / b.r, a.g / b.g, a.b / b.b}; }

    double max_component() const { return std::max(r, std::max(g, b)); }
    double min_component() const { return std::min(r, std::min(g, b)); }
    double mean() const { return (r + g + b) / 3.0; }
    double sum() const { return r + g + b; }

    bool all_finite() const { return std::isfinite(r) && std::isfinite(g) && std::isfinite(b); }
    bool all_nonnegative() const { return r >= 0.0 && g >= 0.0 && b >= 0.0; }

    double operator[](int i) const { return i == 0 ? r : (i == 1 ? g : b); }
    double& operator[](int i) { return i == 0 ? r : (i == 1 ? g : b); }
};

inline Rgb rgb_exp(const Rgb& v) { return {std::exp(v.r), std::exp(v.g), std::exp(v.b)}; }
inline Rgb rgb_max(const Rgb& v, double lo) {
    return {std::max(v.r, lo), std::max(v.g, lo), std::max(v.b, lo)};
}

}  // namespace aquaperc
