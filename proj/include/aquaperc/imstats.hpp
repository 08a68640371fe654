#pragma once

#include <cstdint>

#include "aquaperc/image.hpp"

namespace aquaperc::imstats {

// Fixed patch lattice anchored at the top-left corner; trailing pixels that
// do not fill a whole patch are ignored.
struct PatchGrid {
    int cols{10};
    int rows{6};
    int patch_w{0};
    int patch_h{0};

    static PatchGrid fit(const ImageF& img, int cols = 10, int rows = 6);
    void validate(const ImageF& img) const;
};

Rgb channel_mean(const ImageF& img);

// Population standard deviation over the whole image, per channel.
Rgb whole_stdev(const ImageF& img);

// Mean over patches of the within-patch population standard deviation.
Rgb patch_contrast(const ImageF& img, const PatchGrid& grid);

// Contrast-limited adaptive histogram equalization on the luminance
// channel ((r+g+b)/3, fixed [0, 1] sensor domain), tiles x tiles lattice
// with bilinear blending; channels are rescaled by the luminance ratio.
ImageF clahe(const ImageF& img, double clip_limit = 2.0, int tiles = 8);

// Mean |Sobel_y| of the luminance over interior pixels.
double mean_gradient_y(const ImageF& img);

// Footprint of the camera on a fronto-parallel plane at distance d.
double coverage_area(double d, double fov_h, double aspect, bool usable);

struct MatchParams {
    double contrast_threshold{0.012};  // detector response floor on DoG
    int max_features{600};
    double ratio{0.82};        // Lowe ratio test
    int ransac_iters{512};
    double inlier_px{3.0};
    uint64_t seed{7};
    double clahe_clip{2.0};
    int clahe_tiles{8};
};

struct MatchReport {
    int n_features{0};   // mean detected features per frame
    int n_matches{0};    // putative matches after the ratio test
    int n_inliers{0};
    double inlier_ratio{0.0};  // n_inliers / max(n_matches, 1)
    bool homography_ok{false};
    double tx{0.0}, ty{0.0};  // translation part of the recovered homography
};

// CLAHE -> DoG detector -> oriented patch descriptors -> ratio-test
// matching -> RANSAC homography. Deterministic for a fixed seed.
MatchReport match_consecutive(const ImageF& a, const ImageF& b, const MatchParams& params = {});

}  // namespace aquaperc::imstats
