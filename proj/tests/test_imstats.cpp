#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "aquaperc/imstats.hpp"
#include "aquaperc/rng.hpp"
#include "doctest.h"

using namespace aquaperc;
using namespace aquaperc::imstats;

namespace {

ImageF constant_image(int w, int h, const Rgb& c) {
    ImageF img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.set(x, y, c);
    return img;
}

ImageF noise_image(int w, int h, uint64_t seed) {
    ImageF img(w, h);
    Pcg32 rng(seed, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.set(x, y, {rng.uniform(), rng.uniform(), rng.uniform()});
    return img;
}

// Textured image with distinctive localized structure: varied blobs and
// dips over a smooth multi-sinusoid background, so descriptors are unique
// enough to survive the ratio test.
ImageF blob_image(int w, int h, uint64_t seed) {
    ImageF img(w, h);
    Pcg32 rng(seed, 2);
    std::vector<std::array<double, 5>> blobs;  // x, y, sigma, amplitude, ecc
    for (int i = 0; i < 70; ++i)
        blobs.push_back({rng.uniform(8.0, w - 8.0), rng.uniform(8.0, h - 8.0),
                         rng.uniform(1.2, 4.0), rng.uniform(-0.45, 0.7),
                         rng.uniform(0.5, 2.0)});
    std::vector<std::array<double, 4>> waves;  // fx, fy, phase, amplitude
    for (int i = 0; i < 10; ++i)
        waves.push_back({rng.uniform(0.02, 0.25), rng.uniform(0.02, 0.25),
                         rng.uniform(0.0, 6.28), rng.uniform(0.02, 0.06)});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = 0.45;
            for (const auto& wv : waves) v += wv[3] * std::sin(wv[0] * x + wv[1] * y + wv[2]);
            for (const auto& b : blobs) {
                double dx = (x - b[0]) * b[4], dy = y - b[1];
                v += b[3] * std::exp(-(dx * dx + dy * dy) / (2.0 * b[2] * b[2]));
            }
            v = std::clamp(v, 0.02, 1.0);
            img.set(x, y, {v, v * 0.9, v * 0.8});
        }
    return img;
}

ImageF shift_image(const ImageF& src, int dx, int dy) {
    ImageF out(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            int sx = x - dx, sy = y - dy;
            if (sx >= 0 && sx < src.width && sy >= 0 && sy < src.height)
                out.set(x, y, src.at(sx, sy));
            else
                out.set(x, y, {0.25, 0.22, 0.2});
        }
    return out;
}

// Reference global histogram equalization on the fixed [0, 1] luminance
// domain (256 bins), mirroring the convention clahe() documents.
std::vector<double> reference_hist_equalization(const ImageF& img) {
    const int kBins = 256;
    std::vector<double> lum;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            lum.push_back(std::clamp(img.luminance(x, y), 0.0, 1.0));
    std::vector<double> hist(kBins, 0.0);
    for (double v : lum) hist[std::min(kBins - 1, static_cast<int>(v * kBins))] += 1.0;
    std::vector<double> cdf(kBins, 0.0);
    double acc = 0.0;
    for (int b = 0; b < kBins; ++b) {
        acc += hist[b];
        cdf[b] = acc / lum.size();
    }
    std::vector<double> out;
    for (double v : lum) out.push_back(cdf[std::min(kBins - 1, static_cast<int>(v * kBins))]);
    return out;
}

}  // namespace

TEST_CASE("channel_mean basics") {
    CHECK(channel_mean(constant_image(8, 6, {0.2, 0.4, 0.6})).g == doctest::Approx(0.4));
    ImageF half(8, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) half.set(x, y, x < 4 ? Rgb{0, 0, 0} : Rgb{1, 1, 1});
    CHECK(channel_mean(half).r == doctest::Approx(0.5));

    // 3x3 checkerboard with ones in the corners and center: 5 ones.
    ImageF checker(3, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
            checker.set(x, y, (x + y) % 2 == 0 ? Rgb{1, 1, 1} : Rgb{0, 0, 0});
    CHECK(channel_mean(checker).b == doctest::Approx(5.0 / 9.0));
}

TEST_CASE("patch_contrast removes inter-patch bias") {
    ImageF flat = constant_image(100, 60, {0.3, 0.3, 0.3});
    PatchGrid grid = PatchGrid::fit(flat, 10, 6);
    CHECK(patch_contrast(flat, grid).r == doctest::Approx(0.0));

    // Patches internally constant but different from each other: the patch
    // statistic reads zero while the whole-image stdev does not.
    ImageF blocks(100, 60);
    for (int y = 0; y < 60; ++y)
        for (int x = 0; x < 100; ++x) {
            double level = ((x / 10) + (y / 10) * 10) / 60.0;
            blocks.set(x, y, {level, level, level});
        }
    Rgb pc = patch_contrast(blocks, PatchGrid::fit(blocks, 10, 6));
    CHECK(pc.r == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(whole_stdev(blocks).r > 0.1);

    // Per-pixel alternating 0/1 in every patch: Bernoulli(0.5) stdev.
    ImageF alt(100, 60);
    for (int y = 0; y < 60; ++y)
        for (int x = 0; x < 100; ++x) {
            double v = (x + y) % 2 ? 1.0 : 0.0;
            alt.set(x, y, {v, v, v});
        }
    CHECK(patch_contrast(alt, PatchGrid::fit(alt, 10, 6)).g == doctest::Approx(0.5).epsilon(1e-9));

    CHECK_THROWS(patch_contrast(ImageF(5, 5), grid));
}

TEST_CASE("clahe leaves constants alone and raises ramp contrast") {
    ImageF flat = constant_image(64, 64, {0.4, 0.4, 0.4});
    ImageF out = clahe(flat, 2.0, 8);
    CHECK(out.at(10, 10).r == doctest::Approx(0.4));

    ImageF ramp(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            double v = 0.45 + 0.1 * x / 63.0;
            ramp.set(x, y, {v, v, v});
        }
    ImageF eq = clahe(ramp, 50.0, 4);
    CHECK(whole_stdev(eq).r > whole_stdev(ramp).r);
    CHECK_THROWS(clahe(ramp, 0.0, 4));
}

TEST_CASE("clahe with one tile and huge clip limit is global equalization") {
    ImageF img = noise_image(96, 64, 99);
    for (auto& v : img.data) v = v * v;  // skew the distribution
    ImageF eq = clahe(img, 1e9, 1);
    auto ref = reference_hist_equalization(img);
    double worst = 0.0;
    size_t i = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x, ++i)
            worst = std::max(worst, std::abs(eq.luminance(x, y) - ref[i]));
    CHECK(worst < 0.02);

    // Output luminance CDF is uniform within binning.
    std::vector<double> lum;
    for (int y = 0; y < eq.height; ++y)
        for (int x = 0; x < eq.width; ++x) lum.push_back(eq.luminance(x, y));
    std::sort(lum.begin(), lum.end());
    double lo = lum.front(), hi = lum.back();
    double worst_cdf = 0.0;
    for (size_t k = 0; k < lum.size(); k += 97) {
        double expected = (lum[k] - lo) / (hi - lo);
        double actual = static_cast<double>(k) / lum.size();
        worst_cdf = std::max(worst_cdf, std::abs(expected - actual));
    }
    CHECK(worst_cdf < 0.03);
}

TEST_CASE("mean_gradient_y matches a hand convolution") {
    CHECK(mean_gradient_y(constant_image(16, 16, {0.5, 0.5, 0.5})) == doctest::Approx(0.0));

    // Vertical stripes are invisible to the y-kernel.
    ImageF stripes(20, 12);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 20; ++x) {
            double v = x % 2 ? 1.0 : 0.0;
            stripes.set(x, y, {v, v, v});
        }
    CHECK(mean_gradient_y(stripes) == doctest::Approx(0.0));

    // Horizontal step edge: brute-force Sobel convolution oracle.
    ImageF step(20, 12);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 20; ++x) {
            double v = y >= 6 ? 1.0 : 0.0;
            step.set(x, y, {v, v, v});
        }
    double acc = 0.0;
    int count = 0;
    auto lum = [&](int x, int y) { return step.luminance(x, y); };
    for (int y = 1; y < 11; ++y)
        for (int x = 1; x < 19; ++x) {
            double g = lum(x - 1, y + 1) + 2 * lum(x, y + 1) + lum(x + 1, y + 1) -
                       lum(x - 1, y - 1) - 2 * lum(x, y - 1) - lum(x + 1, y - 1);
            acc += std::abs(g);
            ++count;
        }
    CHECK(mean_gradient_y(step) == doctest::Approx(acc / count).epsilon(1e-12));
    CHECK(mean_gradient_y(step) > 0.0);
    CHECK_THROWS_AS(mean_gradient_y(ImageF(2, 2)), std::domain_error);
}

TEST_CASE("coverage_area closed forms") {
    CHECK(coverage_area(1.0, 3.14159265358979 / 2.0, 1.0, true) == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(coverage_area(2.5, 1.0, 16.0 / 9.0, false) == doctest::Approx(0.0));
    double a1 = coverage_area(1.3, 1.0, 1.5, true);
    double a2 = coverage_area(2.6, 1.0, 1.5, true);
    CHECK(a2 == doctest::Approx(4.0 * a1).epsilon(1e-9));
    CHECK_THROWS_AS(coverage_area(0.0, 1.0, 1.0, true), std::domain_error);
}

TEST_CASE("match_consecutive: self-match is near perfect") {
    ImageF img = blob_image(200, 140, 5);
    MatchReport report = match_consecutive(img, img);
    CHECK(report.n_features > 20);
    CHECK(report.n_matches >= 4);
    CHECK(report.inlier_ratio > 0.9);
    CHECK(std::abs(report.tx) < 0.5);
    CHECK(std::abs(report.ty) < 0.5);
}

TEST_CASE("match_consecutive recovers a 10 px shift") {
    ImageF img = blob_image(200, 140, 6);
    ImageF shifted = shift_image(img, 10, 0);
    MatchReport report = match_consecutive(img, shifted);
    CHECK(report.inlier_ratio > 0.8);
    CHECK(report.tx == doctest::Approx(10.0).epsilon(0.1));
    CHECK(std::abs(report.ty) < 1.0);
}

TEST_CASE("match_consecutive: pure noise yields no stable inliers") {
    ImageF a = blob_image(200, 140, 7);
    ImageF b = noise_image(200, 140, 8);
    MatchReport report = match_consecutive(a, b);
    CHECK(report.n_inliers <= 4);
    CHECK_THROWS(match_consecutive(a, ImageF(64, 64)));
}

TEST_CASE("match_consecutive is roughly symmetric and deterministic") {
    ImageF a = blob_image(200, 140, 9);
    ImageF b = shift_image(a, 4, 3);
    MatchReport ab = match_consecutive(a, b);
    MatchReport ba = match_consecutive(b, a);
    int hi = std::max(ab.n_inliers, ba.n_inliers);
    CHECK(hi > 0);
    CHECK(std::abs(ab.n_inliers - ba.n_inliers) <= 0.2 * hi);

    MatchReport again = match_consecutive(a, b);
    CHECK(again.n_inliers == ab.n_inliers);
    CHECK(again.inlier_ratio == doctest::Approx(ab.inlier_ratio));
}
