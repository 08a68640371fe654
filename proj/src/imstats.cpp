#include "aquaperc/imstats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace aquaperc::imstats {

PatchGrid PatchGrid::fit(const ImageF& img, int cols, int rows) {
    if (cols < 1 || rows < 1) throw std::invalid_argument("PatchGrid: counts must be positive");
    PatchGrid g;
    g.cols = cols;
    g.rows = rows;
    g.patch_w = img.width / cols;
    g.patch_h = img.height / rows;
    g.validate(img);
    return g;
}

void PatchGrid::validate(const ImageF& img) const {
    if (patch_w < 1 || patch_h < 1 || cols * patch_w > img.width || rows * patch_h > img.height)
        throw std::invalid_argument("PatchGrid does not fit the image");
}

Rgb channel_mean(const ImageF& img) {
    if (img.pixel_count() == 0) throw std::domain_error("channel_mean: empty image");
    double acc[3] = {0, 0, 0};
    for (size_t p = 0; p < img.pixel_count(); ++p)
        for (int c = 0; c < 3; ++c) acc[c] += img.data[p * 3 + c];
    double n = static_cast<double>(img.pixel_count());
    return {acc[0] / n, acc[1] / n, acc[2] / n};
}

namespace {

Rgb region_stdev(const ImageF& img, int x0, int y0, int w, int h) {
    double sum[3] = {0, 0, 0}, sum2[3] = {0, 0, 0};
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
            const float* p = &img.data[(static_cast<size_t>(y) * img.width + x) * 3];
            for (int c = 0; c < 3; ++c) {
                sum[c] += p[c];
                sum2[c] += static_cast<double>(p[c]) * p[c];
            }
        }
    }
    double n = static_cast<double>(w) * h;
    Rgb out;
    for (int c = 0; c < 3; ++c) {
        double mean = sum[c] / n;
        out[c] = std::sqrt(std::max(0.0, sum2[c] / n - mean * mean));
    }
    return out;
}

}  // namespace

Rgb whole_stdev(const ImageF& img) {
    if (img.pixel_count() == 0) throw std::domain_error("whole_stdev: empty image");
    return region_stdev(img, 0, 0, img.width, img.height);
}

Rgb patch_contrast(const ImageF& img, const PatchGrid& grid) {
    grid.validate(img);
    Rgb acc{0, 0, 0};
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c)
            acc += region_stdev(img, c * grid.patch_w, r * grid.patch_h, grid.patch_w, grid.patch_h);
    return acc / static_cast<double>(grid.rows * grid.cols);
}

ImageF clahe(const ImageF& img, double clip_limit, int tiles) {
    if (!(clip_limit > 0.0)) throw std::invalid_argument("clahe: clip limit must be positive");
    if (tiles < 1) throw std::invalid_argument("clahe: tile count must be positive");

    // Luminance is treated on the fixed [0, 1] sensor domain.
    const int w = img.width, h = img.height;
    std::vector<double> lum(static_cast<size_t>(w) * h);
    double vmin = 1e300, vmax = -1e300;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = std::clamp(img.luminance(x, y), 0.0, 1.0);
            lum[static_cast<size_t>(y) * w + x] = v;
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    if (vmax - vmin < 1e-12) return img;  // nothing to equalize
    const double lo = 0.0, hi = 1.0;

    const int kBins = 256;
    const int tx = std::min(tiles, w), ty = std::min(tiles, h);
    const double tile_w = static_cast<double>(w) / tx;
    const double tile_h = static_cast<double>(h) / ty;

    // Per-tile clipped histograms -> mapping LUTs.
    std::vector<std::vector<double>> lut(static_cast<size_t>(tx) * ty,
                                         std::vector<double>(kBins, 0.0));
    for (int tj = 0; tj < ty; ++tj) {
        for (int ti = 0; ti < tx; ++ti) {
            int x0 = static_cast<int>(ti * tile_w), x1 = static_cast<int>((ti + 1) * tile_w);
            int y0 = static_cast<int>(tj * tile_h), y1 = static_cast<int>((tj + 1) * tile_h);
            x1 = std::max(x1, x0 + 1);
            y1 = std::max(y1, y0 + 1);
            std::vector<double> hist(kBins, 0.0);
            double count = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    double v = (lum[static_cast<size_t>(y) * w + x] - lo) / (hi - lo);
                    int bin = std::min(kBins - 1, static_cast<int>(v * kBins));
                    hist[bin] += 1.0;
                    count += 1.0;
                }
            // Clip and redistribute the excess uniformly.
            double limit = std::max(1.0, clip_limit * count / kBins);
            double excess = 0.0;
            for (auto& b : hist)
                if (b > limit) {
                    excess += b - limit;
                    b = limit;
                }
            double add = excess / kBins;
            for (auto& b : hist) b += add;
            // Cumulative mapping back into [lo, hi].
            auto& m = lut[static_cast<size_t>(tj) * tx + ti];
            double cdf = 0.0;
            for (int bin = 0; bin < kBins; ++bin) {
                cdf += hist[bin];
                m[bin] = lo + (hi - lo) * (cdf / count);
            }
        }
    }

    auto tile_map = [&](int ti, int tj, double v01) {
        ti = std::clamp(ti, 0, tx - 1);
        tj = std::clamp(tj, 0, ty - 1);
        double fbin = std::clamp(v01, 0.0, 1.0) * (kBins - 1);
        int b0 = static_cast<int>(fbin);
        int b1 = std::min(kBins - 1, b0 + 1);
        double t = fbin - b0;
        const auto& m = lut[static_cast<size_t>(tj) * tx + ti];
        return m[b0] + t * (m[b1] - m[b0]);
    };

    ImageF out(w, h);
    for (int y = 0; y < h; ++y) {
        double gy = (y + 0.5) / tile_h - 0.5;
        int tj = static_cast<int>(std::floor(gy));
        double fy = gy - tj;
        for (int x = 0; x < w; ++x) {
            double gx = (x + 0.5) / tile_w - 0.5;
            int ti = static_cast<int>(std::floor(gx));
            double fx = gx - ti;
            double v01 = (lum[static_cast<size_t>(y) * w + x] - lo) / (hi - lo);
            double m00 = tile_map(ti, tj, v01), m10 = tile_map(ti + 1, tj, v01);
            double m01 = tile_map(ti, tj + 1, v01), m11 = tile_map(ti + 1, tj + 1, v01);
            double mapped = (1 - fy) * ((1 - fx) * m00 + fx * m10) + fy * ((1 - fx) * m01 + fx * m11);
            double old = lum[static_cast<size_t>(y) * w + x];
            double scale = old > 1e-9 ? mapped / old : 1.0;
            Rgb c = img.at(x, y) * scale;
            out.set(x, y, c);
        }
    }
    return out;
}

double mean_gradient_y(const ImageF& img) {
    if (img.width < 3 || img.height < 3)
        throw std::domain_error("mean_gradient_y: image must be at least 3x3");
    double acc = 0.0;
    for (int y = 1; y < img.height - 1; ++y) {
        for (int x = 1; x < img.width - 1; ++x) {
            double g = img.luminance(x - 1, y + 1) + 2.0 * img.luminance(x, y + 1) +
                       img.luminance(x + 1, y + 1) - img.luminance(x - 1, y - 1) -
                       2.0 * img.luminance(x, y - 1) - img.luminance(x + 1, y - 1);
            acc += std::abs(g);
        }
    }
    return acc / (static_cast<double>(img.width - 2) * (img.height - 2));
}

double coverage_area(double d, double fov_h, double aspect, bool usable) {
    if (!(d > 0.0)) throw std::domain_error("coverage_area: distance must be positive");
    if (!usable) return 0.0;
    double span = 2.0 * d * std::tan(0.5 * fov_h);
    return span * (span / aspect);
}

}  // namespace aquaperc::imstats
